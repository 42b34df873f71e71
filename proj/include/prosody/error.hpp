#pragma once

#include <stdexcept>
#include <string>

namespace prosody {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or missing input data (files, tiers, tracks). CLI exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values or config files. CLI exit code 3.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace prosody
