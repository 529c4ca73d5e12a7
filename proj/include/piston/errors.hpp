#ifndef PISTON_ERRORS_HPP_
#define PISTON_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace piston {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a function (e.g. a non-positive density).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A gas law that violates monotonicity/positivity or the admissible
// parameter range.
class InvalidGasModel : public Error {
 public:
  using Error::Error;
};

// Adaptive quadrature or root finding failed to reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved_tolerance)
      : Error(what), achieved_tolerance_(achieved_tolerance) {}
  double achieved_tolerance() const noexcept { return achieved_tolerance_; }

 private:
  double achieved_tolerance_;
};

// The state contains non-finite values.
class DivergedState : public Error {
 public:
  using Error::Error;
};

// A density sample dropped to zero or below after a time step.
class DensityPositivityViolation : public Error {
 public:
  using Error::Error;
};

// Root brackets for the density bounds could not be expanded.
class BarrierUnavailable : public Error {
 public:
  using Error::Error;
};

// The sup of |k| / |P - P_ext| grows without bound on the probe grid.
class AssumptionAFailed : public Error {
 public:
  using Error::Error;
};

/// The numeric divergence probes found no evidence that G and k are unbounded.
class AssumptionHFailed : public Error {
 public:
  using Error::Error;
};

class InvalidProfile : public Error {
 public:
  using Error::Error;
};

// Scenario/config parse or validation failure. `context` names the field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& context, const std::string& what)
      : Error(context.empty() ? what : context + ": " + what), context_(context) {}
  const std::string& context() const noexcept { return context_; }

 private:
  std::string context_;
};

}  // namespace piston

#endif  // PISTON_ERRORS_HPP_
