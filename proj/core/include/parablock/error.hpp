#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace parablock {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or an unusable configuration (empty corpus, p out of
// range, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation precondition (length mismatch, empty set).
class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EncodingError : public Error {
 public:
  EncodingError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Malformed input file content (bad TSV row, unparsable number).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ScoringError : public Error {
 public:
  using Error::Error;
};

// Anything that goes wrong inside a language-model backend.
class BackendError : public Error {
 public:
  using Error::Error;
};

// The byte stream to a remote backend failed (closed, timed out, refused).
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

// The remote backend answered with something that violates the protocol.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace parablock
