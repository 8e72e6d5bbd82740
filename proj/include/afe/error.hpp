#pragma once

#include <stdexcept>
#include <string>

namespace afe {

// Raised when an argument violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A calibration target could not be reached (bisection bracket, loss target).
class CalibrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed scenario configuration; message carries "file:line: ..." when known.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace afe
