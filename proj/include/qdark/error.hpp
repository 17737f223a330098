#pragma once

#include <stdexcept>
#include <string>

namespace qdark {

// Caller supplied something outside an operation's contract.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Text or JSON input that could not be parsed. Line and column are 1-based;
// zero means "not applicable".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " +
                                          std::to_string(column) + ": " + what
                                    : what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

// A numerical procedure failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reading or writing a file failed; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qdark
