#pragma once

#include <stdexcept>
#include <string>

namespace mtrec {

/// Base class for every error raised by the harness.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed a value outside an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data; `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : what + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Completion provider failed (transport, auth, exhausted retries, missing recording).
class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Strict replay found no recording for a request; aborts the run.
class MissingRecording : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

}  // namespace mtrec
