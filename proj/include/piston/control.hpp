#ifndef PISTON_CONTROL_HPP_
#define PISTON_CONTROL_HPP_

#include <string>
#include <variant>

#include "piston/gas_model.hpp"

namespace piston {

struct OpenLoop {};

/// u = -R ((r + 1) v_a + k(rho_a)). Needs the gas density at the piston.
struct FullFeedback {
  double R = 1.0;
  double r = 1.0;
};

/// u = -R v_a. Certified with V = W + r_analysis E whenever
/// r_analysis >= R K / 2, K the constant bounding |k| by |P - P_ext|.
struct Friction {
  double R = 1.0;
  double r_analysis = 0.0;
  double K_used = 0.0;
};

using ControlPolicy = std::variant<OpenLoop, FullFeedback, Friction>;

/// Throws DomainError on non-positive gains or a Friction weight below R K / 2.
void validate(const ControlPolicy& policy);

/// Pressure deviation applied to the left piston. rho_a is the first cell
/// density, v_a the left piston velocity.
double control_input(const ControlPolicy& policy, double rho_a, double v_a, const GasModel& model);

/// Weight r used in V = W + r E when certifying runs under this policy.
/// Open-loop runs have no intrinsic weight and use `open_loop_weight`.
double clf_weight(const ControlPolicy& policy, double open_loop_weight = 1.0);

std::string policy_name(const ControlPolicy& policy);

/// Smallest certified weight R K_hat / 2, with K_hat from estimate_K.
/// Throws AssumptionAFailed if the K estimate is unbounded.
double validate_friction_gains(double R, const GasModel& model, const KGrid& grid = {});

/// Friction policy with r_analysis = R K_hat / 2.
Friction certified_friction(double R, const GasModel& model, const KGrid& grid = {});

}  // namespace piston

#endif  // PISTON_CONTROL_HPP_
