#ifndef PISTON_STATE_HPP_
#define PISTON_STATE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "piston/gas_model.hpp"

namespace piston {

/// Two-piston system on a fixed Lagrangian mass grid m in [0, 1].
///
/// Densities live at the N cell centers m_{i+1/2} = (i + 1/2)/N, velocities
/// at the N + 1 nodes m_i = i/N. Node 0 is the left piston and node N the
/// right piston, so v.front() and v.back() are the piston velocities. The
/// right piston position is not stored: b = a + sum_i dm / rho_i.
struct SystemState {
  double t = 0.0;
  double a = 0.0;
  std::vector<double> rho;
  std::vector<double> v;

  std::size_t cells() const noexcept { return rho.size(); }
  double mass_step() const noexcept { return 1.0 / static_cast<double>(rho.size()); }
  double adot() const { return v.front(); }
  double bdot() const { return v.back(); }
  /// b - a, the length occupied by the gas.
  double length() const;
  double b() const { return a + length(); }
};

/// Throws DomainError if sizes mismatch or any density is not positive
/// and finite, DivergedState if velocities or position are non-finite.
void validate(const SystemState& state);

/// Node positions x_0 = a, x_{i+1} = x_i + dm / rho_i, x_N = b.
std::vector<double> positions(const SystemState& state);

/// Node offsets x_i - a, computed without reference to a.
std::vector<double> relative_positions(const SystemState& state);

/// Node density: mean of the two adjacent cells, or the adjacent cell at a
/// piston.
double node_density(const SystemState& state, std::size_t node);

/// Normalized-coordinate profiles on the uniform grid theta_j = j/N,
/// j = 0..N.
struct NormalizedProfile {
  std::vector<double> theta;
  std::vector<double> rho_tilde;
  std::vector<double> v_tilde;
};

/// Resamples rho and v onto theta = (x - a)/(b - a) by piecewise-linear
/// interpolation; rho is held constant between the piston and the first
/// (last) cell center.
NormalizedProfile phi_transform(const SystemState& state);

/// ||Phi(state) - (rho*, 0)||_X expanded in physical variables:
///   sqrt(v_a^2 + v_b^2) + max|rho - rho*|
///   + ((b-a)^{-1} int v^2 dx)^{1/2} + ((b-a) int rho_x^2 dx)^{1/2}.
double x_norm_deviation(const SystemState& state, const GasModel& model);

/// The four squared terms whose square roots make up the X-norm deviation.
struct NormTerms {
  double pistons = 0.0;       // v_a^2 + v_b^2
  double density_sup = 0.0;   // max |rho - rho*|^2
  double velocity_l2 = 0.0;   // (b-a)^{-1} int v^2 dx
  double gradient_l2 = 0.0;   // (b-a) int rho_x^2 dx
};
NormTerms norm_terms(const SystemState& state, const GasModel& model);

struct ProfileSample {
  double t = 0.0;
  NormalizedProfile profile;
};

struct ReconstructedPosition {
  double t = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Rebuilds piston positions from a time series of normalized profiles:
/// a(t) = a0 + int_0^t v_tilde(s, 0) ds (trapezoid), b = a + 1 / int rho_tilde.
/// Throws InvalidProfile if a profile has non-positive mean density.
std::vector<ReconstructedPosition> reconstruct(std::span<const ProfileSample> series, double a0);

/// Initial data in normalized coordinates:
///   rho0(theta) = rho* (1 + eps_rho cos(pi q_rho theta)),
///   v0(theta)   = eps_v sin(pi q_v theta) + v_off,
/// on [a0, a0 + length], rescaled so the total mass is 1.
struct InitialCondition {
  double eps_rho = 0.0;
  double q_rho = 1.0;
  double eps_v = 0.0;
  double q_v = 1.0;
  double v_off = 0.0;
  double a0 = 0.0;
  std::optional<double> length;  // defaults to 1/rho*
};

/// Builds the mass-grid state. Cell densities are cell mass over exact cell
/// width, so b - a equals the requested length. Throws DomainError when
/// the density amplitude allows rho0 <= 0.
SystemState make_initial_state(const InitialCondition& ic, const GasModel& model, std::size_t cells);

}  // namespace piston

#endif  // PISTON_STATE_HPP_
