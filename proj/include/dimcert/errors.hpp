#pragma once

#include <stdexcept>
#include <string>

namespace dimcert {

// Malformed input file. Carries the most precise location the parser has;
// the CLI maps this to exit code 2.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, const std::string& message)
      : std::runtime_error(line > 0
                               ? file + ":" + std::to_string(line) + ": " + message
                               : file + ": " + message),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

// An algorithm could not meet its accuracy contract (factorization failure,
// solver stall, residual out of tolerance). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dimcert
