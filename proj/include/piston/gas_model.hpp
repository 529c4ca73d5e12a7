#ifndef PISTON_GAS_MODEL_HPP_
#define PISTON_GAS_MODEL_HPP_

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "piston/quadrature.hpp"

namespace piston {

/// Polytropic gas under constant entropy: P = c rho^gamma with the matching
/// density-dependent viscosity mu = A rho^((gamma-1)/2).
struct IdealGas {
  double c = 1.0;
  double gamma = 1.5;
  double A = 1.0;
};

/// Declared lower power-law envelopes P >= c rho^gamma, mu >= A rho^eta.
/// When present, check_assumption_H reports whether the envelope meets the
/// sufficient condition gamma in (1,2), eta in [0, 1/2].
struct PowerLawBounds {
  double c = 1.0;
  double gamma = 1.5;
  double A = 1.0;
  double eta = 0.25;
};

/// Arbitrary barotropic law given as callables.
struct GenericGas {
  std::function<double(double)> pressure;
  std::function<double(double)> pressure_derivative;
  std::function<double(double)> viscosity;
  std::optional<PowerLawBounds> bounds;
};

using GasLaw = std::variant<IdealGas, GenericGas>;

/// One row of a tabulated gas: density, pressure, viscosity.
struct GasSample {
  double rho = 0.0;
  double pressure = 0.0;
  double viscosity = 0.0;
};

/// Builds a GenericGas that interpolates the samples linearly in log-log
/// space and extrapolates with the end slopes. Power laws are reproduced
/// exactly. Throws InvalidGasModel unless rho and P are strictly increasing
/// and every value is positive.
GenericGas tabulated_gas(std::vector<GasSample> samples);

/// Solves P(rho*) = p_ext: closed form for IdealGas, otherwise bracket
/// expansion by doubling followed by bisection.
double solve_rho_star(const GasLaw& law, double p_ext);

/// Immutable gas model. Holds the laws, the external pressure and the cached
/// equilibrium density, and evaluates the derived potentials
///   Q(rho) (potential energy density), k(rho) (viscous potential),
///   G(rho) (barrier function).
class GasModel {
 public:
  GasModel(GasLaw law, double p_ext, QuadratureConfig quadrature = {});

  static GasModel ideal(double c, double gamma, double A, double p_ext);

  const GasLaw& law() const noexcept { return law_; }
  const IdealGas* ideal_params() const noexcept { return std::get_if<IdealGas>(&law_); }
  const QuadratureConfig& quadrature() const noexcept { return quad_; }
  double p_ext() const noexcept { return p_ext_; }
  double rho_star() const noexcept { return rho_star_; }

  double pressure(double rho) const;
  double pressure_derivative(double rho) const;
  double viscosity(double rho) const;

  /// P(rho) and mu(rho) in one call; the solver's hot path.
  void pressure_and_viscosity(double rho, double& p, double& mu) const {
    if (is_ideal_) {
      // gamma = 1.5 is common enough to skip pow.
      const double s = half_gm1_ == 0.25 ? std::sqrt(std::sqrt(rho)) : std::pow(rho, half_gm1_);
      mu = ideal_.A * s;
      p = ideal_.c * rho * s * s;
    } else {
      p = pressure(rho);
      mu = viscosity(rho);
    }
  }

  /// Q(rho) = rho * int_{rho*}^{rho} P(t)/t^2 dt - P(rho*) rho / rho* + P(rho*).
  /// Non-negative, zero only at rho*.
  double potential_energy_density(double rho) const;

  /// k(rho) = int_{rho*}^{rho} mu(t)/t dt. Strictly increasing, k(rho*) = 0.
  double viscous_potential(double rho) const;

  /// G(rho) = int_{rho*}^{rho} mu(l) l^{-3/2} sqrt(Q(l)) dl. Always by
  /// quadrature; no elementary closed form exists even for IdealGas.
  double barrier_function(double rho) const;

 private:
  GasLaw law_;
  bool is_ideal_ = false;
  IdealGas ideal_{};
  double half_gm1_ = 0.0;
  double p_ext_ = 0.0;
  double rho_star_ = 0.0;
  QuadratureConfig quad_;
};

/// Geometric density ladder rho* * 10^j used for the divergence probes.
struct DensityLadder {
  int decades_below = 6;
  int decades_above = 6;
};

/// Divergence evidence for one end of the ladder.
struct LadderEvidence {
  bool diverges = false;
  double rho_at = 0.0;           // extreme rung
  double last_increment = 0.0;   // |f(extreme) - f(previous rung)|
  double previous_increment = 0.0;
  std::string note;
};

enum class PowerLawStatus { Satisfied, NotSatisfied, NotDeclared };

struct AssumptionHReport {
  bool consistent = false;
  LadderEvidence barrier_upper;    // G -> +inf as rho -> inf
  LadderEvidence barrier_lower;    // G -> -inf as rho -> 0
  LadderEvidence potential_upper;  // k -> +inf as rho -> inf
  PowerLawStatus power_law = PowerLawStatus::NotDeclared;
  std::vector<double> ladder;
  std::vector<double> barrier_values;
  std::vector<double> potential_values;
  std::string summary;
};

/// Numeric evidence that G and k diverge at the ends of the ladder. A
/// failed probe is a report outcome, never an exception.
AssumptionHReport check_assumption_H(const GasModel& model, const DensityLadder& ladder = {});

struct KGrid {
  int decades_below = 6;
  int decades_above = 6;
  int points_per_decade = 20;
  double safety_factor = 1.25;
  double near_tolerance = 1e-4;  // |rho/rho* - 1| below this uses k'/P'
};

struct KEstimate {
  bool bounded = false;
  double k_hat = 0.0;           // safety_factor * raw_sup
  double raw_sup = 0.0;
  double rho_at_sup = 0.0;
  double limit_at_rho_star = 0.0;
  std::optional<double> analytic_lower_bound;  // IdealGas only
  bool satisfies_analytic_bound = true;
  std::string summary;
};

/// Grid estimate of the smallest K with |k(rho)| <= K |P(rho) - P(rho*)|.
KEstimate estimate_K(const GasModel& model, const KGrid& grid = {});

/// Same estimate over caller-supplied densities.
KEstimate estimate_K(const GasModel& model, std::span<const double> densities,
                     double safety_factor, double near_tolerance = 1e-4);

/// True when the sequence keeps growing toward its last element: the last
/// increment is positive and at least 0.9 of the previous one.
bool shows_divergence(double previous, double middle, double last);

}  // namespace piston

#endif  // PISTON_GAS_MODEL_HPP_
