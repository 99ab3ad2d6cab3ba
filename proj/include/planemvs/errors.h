#pragma once

#include <stdexcept>
#include <string>

namespace planemvs {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (maps to CLI exit code 2).
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& file, int line, const std::string& what)
      : InputError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

class LengthError : public InputError {
 public:
  using InputError::InputError;
};

// A numeric argument outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Degenerate geometry: collinear triangles, parallel rays, singular warps.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// An internal invariant was violated (maps to CLI exit code 3).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace planemvs
