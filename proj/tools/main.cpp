#include "cli.hpp"

int main(int argc, char **argv) { return glru::cli::run(argc, argv); }
