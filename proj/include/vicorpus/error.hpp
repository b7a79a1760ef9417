#pragma once

#include <stdexcept>
#include <string>

namespace vicorpus {

/// Base for every error this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad flags or config values; the CLI maps it to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Unrecoverable input problem (unreadable directory, strict-mode violation).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace vicorpus
