#ifndef GLRU_ERROR_HPP
#define GLRU_ERROR_HPP

#include <stdexcept>
#include <string>

namespace glru {

// Error categories. The CLI maps each category to a stable exit status.
enum class error_code : int {
  internal = 1,
  usage = 2,
  parse = 3,
  validation = 4,
  normalization = 5,
  convergence = 6,
  assumption = 7,
  domain = 8,
  io = 9,
};

class error : public std::runtime_error {
 public:
  error(error_code code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  error_code code() const noexcept { return code_; }

 private:
  error_code code_;
};

class parse_error : public error {
 public:
  parse_error(std::size_t line, const std::string &what)
      : error(error_code::parse,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class validation_error : public error {
 public:
  explicit validation_error(const std::string &what)
      : error(error_code::validation, what) {}
};

class normalization_error : public error {
 public:
  normalization_error(std::ptrdiff_t column, const std::string &what)
      : error(error_code::normalization,
              "column " + std::to_string(column) + ": " + what),
        column_(column) {}
  std::ptrdiff_t column() const noexcept { return column_; }

 private:
  std::ptrdiff_t column_;
};

class convergence_error : public error {
 public:
  convergence_error(double best_relative_gap, const std::string &what)
      : error(error_code::convergence, what),
        best_relative_gap_(best_relative_gap) {}
  double best_relative_gap() const noexcept { return best_relative_gap_; }

 private:
  double best_relative_gap_;
};

// A bound was requested whose convexity/smoothness precondition fails.
class assumption_error : public error {
 public:
  explicit assumption_error(const std::string &what)
      : error(error_code::assumption, what) {}
};

class domain_error : public error {
 public:
  explicit domain_error(const std::string &what)
      : error(error_code::domain, what) {}
};

}  // namespace glru

#endif  // GLRU_ERROR_HPP
