#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shepvi {

// Base class for everything thrown by this library on top of the standard
// exceptions.  std::invalid_argument / std::domain_error are still used for
// plain precondition violations (bad lengths, negative radii, ...).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent run configuration.  The driver maps this to exit
// code 2.
struct ConfigError : Error {
  using Error::Error;
};

// A computation failed numerically (divergence, unstabilizable start state,
// ill-conditioned interpolation system).  Exit code 3.
struct NumericError : Error {
  using Error::Error;
};

// File system / format trouble.  Exit code 4.
struct IoError : Error {
  using Error::Error;
};

// Malformed input file.  byte_offset points at the offending position.
struct ParseError : IoError {
  ParseError(const std::string& what, std::size_t offset)
      : IoError(what + " at byte " + std::to_string(offset)),
        byte_offset(offset) {}
  std::size_t byte_offset;
};

// Dense interpolation system too close to singular.
struct ConditioningError : NumericError {
  using NumericError::NumericError;
};

// Query state outside the stabilizable set of a feedback policy.
struct NotStabilizableError : NumericError {
  using NumericError::NumericError;
};

// Every admissible control leads to an infinite cost-to-go.
struct DeadEndError : NumericError {
  using NumericError::NumericError;
};

}  // namespace shepvi
