#ifndef PISTON_LYAPUNOV_HPP_
#define PISTON_LYAPUNOV_HPP_

#include "piston/gas_model.hpp"
#include "piston/state.hpp"

namespace piston {

// Discrete conventions shared with the solver and the controllers:
//  * the gas density "at a piston" is the adjacent cell-center value;
//  * x-integrals are taken in the mass coordinate, dx = dm / rho;
//  * x-derivatives use the chain rule d/dx = rho d/dm with differences of
//    adjacent cells at interior nodes.

/// U = int Q(rho) dx.
double potential_energy(const SystemState& state, const GasModel& model);

/// E = v_a^2/2 + v_b^2/2 + 1/2 int rho v^2 dx + U, with the gas kinetic
/// energy taken from node velocities averaged to cell centers.
double mechanical_energy(const SystemState& state, const GasModel& model);

/// W = 1/2 int rho^{-1} (rho v + k(rho)_x)^2 dx + 1/2 (v_b - k(rho_b))^2
///     + 1/2 (v_a + k(rho_a))^2 + U.
double transformed_energy(const SystemState& state, const GasModel& model);

/// The non-negative dissipation integrals and boundary products that make
/// up the analytic rates.
struct DissipationTerms {
  double velocity = 0.0;        // int mu(rho) v_x^2 dx
  double density = 0.0;         // int rho^-2 P'(rho) mu(rho) rho_x^2 dx
  double left_boundary = 0.0;   // k(rho_a) (P(rho_a) - P_ext)
  double right_boundary = 0.0;  // k(rho_b) (P(rho_b) - P_ext)
  double rho_a = 0.0;
  double rho_b = 0.0;
  double k_a = 0.0;
  double k_b = 0.0;
  double v_a = 0.0;
};
DissipationTerms dissipation_terms(const SystemState& state, const GasModel& model);

struct DissipationRates {
  double dE_dt = 0.0;
  double dW_dt = 0.0;
  double dV_dt = 0.0;
};

/// Analytic time derivatives of E, W and V = W + r E along solutions driven
/// by the left-piston pressure deviation u.
DissipationRates dissipation_rates(const SystemState& state, const GasModel& model, double u,
                                   double r);
DissipationRates dissipation_rates(const DissipationTerms& terms, double u, double r);

struct LyapunovReport {
  double U = 0.0;
  double E = 0.0;
  double W = 0.0;
  double V = 0.0;
  double r = 0.0;
  double dE_dt = 0.0;
  double dW_dt = 0.0;
  double dV_dt = 0.0;
};

/// V = W + r E together with its parts and the analytic rates for input u.
LyapunovReport control_lyapunov(const SystemState& state, const GasModel& model, double r,
                                double u = 0.0);

/// Density bounds valid on the sublevel set {V <= S}, built from the
/// level-set equations for k and G:
///   k(rho_1) = 2 sqrt((1 + 1/r) S)
///   G(rho_max) = G(rho_1) + 2 S / sqrt(r)
///   G(rho_2) = G(rho*/2) - 2 S / sqrt(r)
///   G(rho_3) = G((r+1)/(S+1) Q(rho*/2)) - 2 S / sqrt(r)
///   rho_min = min(rho*/2, rho_2, rho_3)
struct BarrierBounds {
  double rho_min = 0.0;
  double rho_max = 0.0;
  double S = 0.0;
  double r = 0.0;
  double rho_1 = 0.0;
  double rho_2 = 0.0;
  double rho_3 = 0.0;
};

/// Throws BarrierUnavailable when a root bracket cannot be expanded.
BarrierBounds barrier_bounds(const GasModel& model, double S, double r);

/// Solves f(rho) = target for increasing f by bracket expansion (doubling
/// or halving from `start`) and bisection. Throws BarrierUnavailable.
template <class F>
double invert_increasing(F&& f, double target, double start, double rel_tol = 1e-13);

/// Xi = v_a^2 + v_b^2 + max|rho - rho*|^2 + (b-a)^{-1} int v^2 dx
///      + (b-a) int rho_x^2 dx, with the X-norm quadrature conventions.
double deviation_functional(const SystemState& state, const GasModel& model);

// ---------------------------------------------------------------------------

template <class F>
double invert_increasing(F&& f, double target, double start, double rel_tol) {
  const double f0 = f(start);
  if (f0 == target) return start;
  double lo = start;
  double hi = start;
  constexpr int kMaxExpansions = 200;
  int n = 0;
  if (f0 < target) {
    hi = 2.0 * start;
    while (f(hi) < target) {
      lo = hi;
      hi *= 2.0;
      if (++n > kMaxExpansions || !std::isfinite(hi)) {
        throw BarrierUnavailable("level-set root: upper bracket expansion failed");
      }
    }
  } else {
    lo = 0.5 * start;
    while (f(lo) > target) {
      hi = lo;
      lo *= 0.5;
      if (++n > kMaxExpansions || !(lo > 0.0)) {
        throw BarrierUnavailable("level-set root: lower bracket expansion failed");
      }
    }
  }
  for (int it = 0; it < 500; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= rel_tol * lo) break;
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace piston

#endif  // PISTON_LYAPUNOV_HPP_
