#pragma once

#include <stdexcept>
#include <string>

namespace pmarl {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto exit codes (config → 2, numeric → 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad field values, dimension mismatches between
/// components, unknown presets, unreadable files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller passed data that violates an operation's precondition (non-finite
/// action, priority outside (0,1), ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Value outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Communication protocol violation, e.g. two messages from one sender in a
/// single delivery.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmarl
