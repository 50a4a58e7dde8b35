#pragma once

#include <stdexcept>
#include <string>

namespace fd3 {

// Invalid argument or configuration value.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File missing, unreadable or unwritable.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File exists but its contents cannot be decoded.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checkpoint written by an incompatible format version.
class VersionError : public DecodeError {
 public:
  using DecodeError::DecodeError;
};

// Training diverged (non-finite loss) or otherwise cannot proceed.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fd3
