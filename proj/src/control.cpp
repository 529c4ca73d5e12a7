#include "piston/control.hpp"

#include <cmath>
#include <sstream>

namespace piston {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate(const ControlPolicy& policy) {
  std::visit(overloaded{
                 [](const OpenLoop&) {},
                 [](const FullFeedback& p) {
                   if (!(p.R > 0.0) || !(p.r > 0.0)) {
                     throw DomainError("full feedback: gains R and r must be > 0");
                   }
                 },
                 [](const Friction& p) {
                   if (!(p.R > 0.0)) throw DomainError("friction: gain R must be > 0");
                   if (!(p.K_used > 0.0) || !(p.r_analysis > 0.0)) {
                     throw DomainError("friction: K_used and r_analysis must be > 0");
                   }
                   // Relative slack for weights produced by R * K / 2 itself.
                   if (p.r_analysis < 0.5 * p.R * p.K_used * (1.0 - 1e-12)) {
                     std::ostringstream os;
                     os << "friction: r_analysis = " << p.r_analysis << " is below R K / 2 = "
                        << 0.5 * p.R * p.K_used;
                     throw DomainError(os.str());
                   }
                 },
             },
             policy);
}

double control_input(const ControlPolicy& policy, double rho_a, double v_a, const GasModel& model) {
  if (!(rho_a > 0.0)) throw DomainError("control input: boundary density must be > 0");
  return std::visit(overloaded{
                        [](const OpenLoop&) { return 0.0; },
                        [&](const FullFeedback& p) {
                          return -p.R * ((p.r + 1.0) * v_a + model.viscous_potential(rho_a));
                        },
                        [&](const Friction& p) { return -p.R * v_a; },
                    },
                    policy);
}

double clf_weight(const ControlPolicy& policy, double open_loop_weight) {
  return std::visit(overloaded{
                        [&](const OpenLoop&) { return open_loop_weight; },
                        [](const FullFeedback& p) { return p.r; },
                        [](const Friction& p) { return p.r_analysis; },
                    },
                    policy);
}

std::string policy_name(const ControlPolicy& policy) {
  return std::visit(overloaded{
                        [](const OpenLoop&) { return std::string("open"); },
                        [](const FullFeedback&) { return std::string("full"); },
                        [](const Friction&) { return std::string("friction"); },
                    },
                    policy);
}

double validate_friction_gains(double R, const GasModel& model, const KGrid& grid) {
  if (!(R > 0.0)) throw DomainError("friction: gain R must be > 0");
  const KEstimate est = estimate_K(model, grid);
  if (!est.bounded) throw AssumptionAFailed(est.summary);
  return 0.5 * R * est.k_hat;
}

Friction certified_friction(double R, const GasModel& model, const KGrid& grid) {
  if (!(R > 0.0)) throw DomainError("friction: gain R must be > 0");
  const KEstimate est = estimate_K(model, grid);
  if (!est.bounded) throw AssumptionAFailed(est.summary);
  return Friction{R, 0.5 * R * est.k_hat, est.k_hat};
}

}  // namespace piston
