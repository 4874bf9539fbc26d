#pragma once

#include <stdexcept>

namespace cavpa {

// Base class for all failures raised by the library. The CLI maps Error
// subclasses to exit code 1 (physics/convergence) and ConfigError to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A physical input violates a precondition (negative rate, f_fc outside
// [0,1], non-positive geometry, ...).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

// A closed-form expression is evaluated at a pole of its denominator.
class SingularParameterError : public Error {
 public:
  using Error::Error;
};

// Dimension or schema mismatch between objects that must agree.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// The adaptive integrator could not proceed (step underflow, tolerance
// not attainable, norm blow-up in the fixed-step reference).
class IntegrationError : public Error {
 public:
  using Error::Error;
};

// The 99.9% transfer threshold was not reached within the time budget.
class TransferTimeoutError : public Error {
 public:
  using Error::Error;
};

// A fixed-point search did not converge within its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Collective system size beyond the supported range.
class UnsupportedSizeError : public Error {
 public:
  using Error::Error;
};

// The pulse optimizer found no feasible Rabi frequency.
class ConstraintInfeasibleError : public Error {
 public:
  using Error::Error;
};

// Config file syntax or key errors.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cavpa
