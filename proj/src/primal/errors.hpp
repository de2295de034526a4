#pragma once

#include <stdexcept>
#include <string>

namespace primal {

// Invalid data, broken invariants, bad arguments.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem problems: missing files, unreadable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, size_t line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  explicit ParseError(const std::string& msg) : Error(msg), line_(0) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

}  // namespace primal
