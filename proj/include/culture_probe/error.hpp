#pragma once

#include <stdexcept>
#include <string>

namespace cprobe {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or schema. CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or network failure. CLI exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Lookup of a cue that the association table does not contain.
class UnknownCueError : public ValidationError {
 public:
  explicit UnknownCueError(const std::string& cue)
      : ValidationError("unknown cue: '" + cue + "'"), cue_(cue) {}
  const std::string& cue() const noexcept { return cue_; }

 private:
  std::string cue_;
};

/// The model endpoint does not provide a feature the request needs.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace cprobe
