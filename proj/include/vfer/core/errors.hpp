#pragma once

#include <stdexcept>
#include <string>

namespace vfer {

// Root of every error raised by the library. Callers that only need to
// distinguish "our failure" from everything else can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed tensor shapes, non-finite values, out-of-contract arguments.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Text that fails to parse. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Weight or checkpoint content does not fit the model it is loaded into.
class LoadError : public Error {
 public:
  using Error::Error;
};

class FingerprintMismatchError : public LoadError {
 public:
  using LoadError::LoadError;
};

// A loss was requested over a batch in which every label is Invalid.
class NoValidTargetError : public Error {
 public:
  using Error::Error;
};

}  // namespace vfer
