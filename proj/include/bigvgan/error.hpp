#pragma once

#include <stdexcept>
#include <string>

namespace bigvgan {

/// Shape, channel or hyperparameter contract violated by a caller or config.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed bytes in a checkpoint, mel or WAV file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checkpoint's tensor manifest does not match its config.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that this engine refuses (wrong rate, channel count, too short).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bigvgan
