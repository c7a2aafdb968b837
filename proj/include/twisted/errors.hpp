#pragma once

#include <stdexcept>
#include <string>

namespace twisted {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A quotient of Bessel functions was evaluated too close to a zero of its
/// denominator. Callers near a pole should switch to the cleared form.
class PoleProximityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An iterative method (root refinement, Newton, continuation, eigensolver)
/// failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed external input (JSON request, values file, CLI arguments).
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace twisted
