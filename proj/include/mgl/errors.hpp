#pragma once

#include <stdexcept>
#include <string>

namespace mgl {

/// Malformed or inconsistent input (bad index, mismatched spaces, schema
/// violation, adaptation/predictability violation).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested enumeration or model is too large for exact treatment.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A value outside an operation's mathematical domain (e.g. a negative
/// function handed to the staircase approximation).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A structural precondition between arguments does not hold (e.g. the
/// coarse sigma-algebra is not contained in the fine one).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mgl
