#include "piston/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace piston {

double potential_energy(const SystemState& state, const GasModel& model) {
  const double dm = state.mass_step();
  double sum = 0.0;
  for (double r : state.rho) sum += model.potential_energy_density(r) / r;
  return sum * dm;
}

double mechanical_energy(const SystemState& state, const GasModel& model) {
  const std::size_t n = state.cells();
  const double dm = state.mass_step();
  double kinetic = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double vbar = 0.5 * (state.v[j] + state.v[j + 1]);
    kinetic += vbar * vbar;
  }
  const double va = state.v.front();
  const double vb = state.v.back();
  return 0.5 * (va * va + vb * vb) + 0.5 * kinetic * dm + potential_energy(state, model);
}

namespace {

std::vector<double> cell_potentials(const SystemState& state, const GasModel& model) {
  std::vector<double> k(state.cells());
  for (std::size_t j = 0; j < k.size(); ++j) k[j] = model.viscous_potential(state.rho[j]);
  return k;
}

}  // namespace

double transformed_energy(const SystemState& state, const GasModel& model) {
  const std::size_t n = state.cells();
  const double dm = state.mass_step();
  const auto k = cell_potentials(state, model);

  // rho v + k(rho)_x = rho (v + k_m); with dx = dm / rho the gas term is
  // 1/2 int (v + k_m)^2 dm, trapezoid over nodes.
  auto dk = [&](std::size_t node) {
    if (n < 2) return 0.0;
    const std::size_t i = std::clamp<std::size_t>(node, 1, n - 1);
    return (k[i] - k[i - 1]) / dm;
  };
  double gas = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = state.v[i] + dk(i);
    gas += (i == 0 || i == n ? 0.5 : 1.0) * w * w;
  }
  gas *= 0.5 * dm;

  const double right = state.v.back() - k.back();
  const double left = state.v.front() + k.front();
  return gas + 0.5 * right * right + 0.5 * left * left + potential_energy(state, model);
}

DissipationTerms dissipation_terms(const SystemState& state, const GasModel& model) {
  const std::size_t n = state.cells();
  const double dm = state.mass_step();
  const double pe = model.p_ext();

  DissipationTerms t;
  std::vector<double> p(n);
  std::vector<double> k(n);
  double dv = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double mu = 0.0;
    model.pressure_and_viscosity(state.rho[j], p[j], mu);
    k[j] = model.viscous_potential(state.rho[j]);
    const double vm = (state.v[j + 1] - state.v[j]) / dm;
    dv += mu * state.rho[j] * vm * vm;
  }
  t.velocity = dv * dm;

  // rho^-2 P' mu rho_x^2 dx = P_m k_m dm; differencing P and k separately
  // keeps every node contribution non-negative.
  double dr = 0.0;
  for (std::size_t i = 1; i < n; ++i) dr += (p[i] - p[i - 1]) * (k[i] - k[i - 1]);
  t.density = dr / dm;

  t.rho_a = state.rho.front();
  t.rho_b = state.rho.back();
  t.k_a = k.front();
  t.k_b = k.back();
  t.left_boundary = t.k_a * (p.front() - pe);
  t.right_boundary = t.k_b * (p.back() - pe);
  t.v_a = state.v.front();
  return t;
}

DissipationRates dissipation_rates(const DissipationTerms& t, double u, double r) {
  DissipationRates out;
  out.dE_dt = -t.velocity + t.v_a * u;
  out.dW_dt = -t.density - t.right_boundary - t.left_boundary + (t.v_a + t.k_a) * u;
  out.dV_dt = out.dW_dt + r * out.dE_dt;
  return out;
}

DissipationRates dissipation_rates(const SystemState& state, const GasModel& model, double u,
                                   double r) {
  return dissipation_rates(dissipation_terms(state, model), u, r);
}

LyapunovReport control_lyapunov(const SystemState& state, const GasModel& model, double r,
                                double u) {
  if (!(r > 0.0)) throw DomainError("control Lyapunov functional: weight r must be > 0");
  LyapunovReport rep;
  rep.r = r;
  rep.U = potential_energy(state, model);
  rep.E = mechanical_energy(state, model);
  rep.W = transformed_energy(state, model);
  rep.V = rep.W + r * rep.E;
  const auto rates = dissipation_rates(state, model, u, r);
  rep.dE_dt = rates.dE_dt;
  rep.dW_dt = rates.dW_dt;
  rep.dV_dt = rates.dV_dt;
  return rep;
}

BarrierBounds barrier_bounds(const GasModel& model, double S, double r) {
  if (!(S >= 0.0) || !std::isfinite(S)) throw DomainError("barrier bounds: S must be >= 0");
  if (!(r > 0.0)) throw DomainError("barrier bounds: r must be > 0");
  const double rs = model.rho_star();
  auto G = [&](double rho) { return model.barrier_function(rho); };
  auto k = [&](double rho) { return model.viscous_potential(rho); };
  const double spread = 2.0 * S / std::sqrt(r);

  BarrierBounds b;
  b.S = S;
  b.r = r;
  b.rho_1 = invert_increasing(k, 2.0 * std::sqrt((1.0 + 1.0 / r) * S), rs);
  b.rho_max = invert_increasing(G, G(b.rho_1) + spread, rs);

  const double half = 0.5 * rs;
  b.rho_2 = invert_increasing(G, G(half) - spread, rs);
  const double q_level = (r + 1.0) / (S + 1.0) * model.potential_energy_density(half);
  b.rho_3 = invert_increasing(G, G(q_level) - spread, rs);
  b.rho_min = std::min({half, b.rho_2, b.rho_3});
  return b;
}

double deviation_functional(const SystemState& state, const GasModel& model) {
  const NormTerms t = norm_terms(state, model);
  return t.pistons + t.density_sup + t.velocity_l2 + t.gradient_l2;
}

}  // namespace piston
