#ifndef GLRU_TOOLS_CLI_HPP
#define GLRU_TOOLS_CLI_HPP

#include "glru/data.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace glru::cli {

// Runs the command line `args` (args[0] is the program name) and returns the
// exit status: 0 on success, 2 for usage errors, otherwise the error_code
// of the failing module.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
int run(int argc, char **argv);

// Git-style blob hash: sha1("blob <size>\0" + bytes), hex encoded.
std::string content_hash(const std::string &bytes);
std::string file_hash(const std::string &path);

}  // namespace glru::cli

#endif  // GLRU_TOOLS_CLI_HPP
