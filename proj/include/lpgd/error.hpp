#pragma once

#include <stdexcept>
#include <string>

namespace lpgd {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct OverflowError : Error {
  using Error::Error;
};

struct FormatMismatchError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace lpgd
