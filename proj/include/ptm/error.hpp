#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// An input does not cover every document it is required to.
class CoverageError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The exhaustive oracle refuses instances whose search space exceeds its guard.
class TooLargeError : public Error {
 public:
  using Error::Error;
};

}  // namespace ptm
