#pragma once

#include <stdexcept>
#include <string>

namespace ssmma {

/// Bad argument to a library operation (out-of-range parameter, point outside
/// its space, function value outside the declared codomain).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operation is not defined for this flow variant.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A cocycle vanished where a nonzero value is required.
class DegenerateCocycle : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A transform was applied to a functional that is already in related form.
class IdempotenceError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// |sum theta_k G_{t_k}|^alpha is not integrable under the configured quadrature.
class IntegrabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssmma
