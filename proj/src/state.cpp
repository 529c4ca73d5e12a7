#include "piston/state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace piston {

double SystemState::length() const {
  const double dm = mass_step();
  double sum = 0.0;
  for (double r : rho) sum += dm / r;
  return sum;
}

void validate(const SystemState& state) {
  if (state.rho.empty()) throw DomainError("state: at least one cell is required");
  if (state.v.size() != state.rho.size() + 1) {
    throw DomainError("state: expected N+1 node velocities for N cells");
  }
  for (std::size_t i = 0; i < state.rho.size(); ++i) {
    if (!std::isfinite(state.rho[i])) throw DivergedState("state: non-finite density");
    if (!(state.rho[i] > 0.0)) {
      std::ostringstream os;
      os << "state: non-positive density " << state.rho[i] << " in cell " << i;
      throw DomainError(os.str());
    }
  }
  for (double v : state.v) {
    if (!std::isfinite(v)) throw DivergedState("state: non-finite velocity");
  }
  if (!std::isfinite(state.a) || !std::isfinite(state.t)) {
    throw DivergedState("state: non-finite position or time");
  }
}

std::vector<double> relative_positions(const SystemState& state) {
  const double dm = state.mass_step();
  std::vector<double> x(state.cells() + 1);
  x[0] = 0.0;
  for (std::size_t i = 0; i < state.cells(); ++i) x[i + 1] = x[i] + dm / state.rho[i];
  return x;
}

std::vector<double> positions(const SystemState& state) {
  auto x = relative_positions(state);
  for (double& xi : x) xi += state.a;
  return x;
}

double node_density(const SystemState& state, std::size_t node) {
  const std::size_t n = state.cells();
  if (node == 0) return state.rho.front();
  if (node >= n) return state.rho.back();
  return 0.5 * (state.rho[node - 1] + state.rho[node]);
}

namespace {

// Piecewise-linear interpolation of (xs, ys) at sorted query points, with
// constant extension beyond the data range.
std::vector<double> interpolate_sorted(const std::vector<double>& xs, const std::vector<double>& ys,
                                       const std::vector<double>& query) {
  std::vector<double> out(query.size());
  std::size_t j = 0;
  for (std::size_t k = 0; k < query.size(); ++k) {
    const double q = query[k];
    if (q <= xs.front()) {
      out[k] = ys.front();
      continue;
    }
    if (q >= xs.back()) {
      out[k] = ys.back();
      continue;
    }
    while (j + 1 < xs.size() && xs[j + 1] < q) ++j;
    const double w = (q - xs[j]) / (xs[j + 1] - xs[j]);
    out[k] = ys[j] + w * (ys[j + 1] - ys[j]);
  }
  return out;
}

// sin(pi x), exactly zero at integer x.
double sin_pi(double x) {
  const double r = x - 2.0 * std::round(0.5 * x);  // in [-1, 1]
  if (r == 0.0 || std::abs(r) == 1.0) return 0.0;
  return std::sin(std::numbers::pi * r);
}

}  // namespace

NormalizedProfile phi_transform(const SystemState& state) {
  validate(state);
  const std::size_t n = state.cells();
  const auto rel = relative_positions(state);
  const double len = rel.back();

  NormalizedProfile out;
  out.theta.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out.theta[k] = static_cast<double>(k) / static_cast<double>(n);

  std::vector<double> theta_nodes(n + 1);
  for (std::size_t i = 0; i <= n; ++i) theta_nodes[i] = rel[i] / len;
  std::vector<double> theta_centers(n);
  for (std::size_t i = 0; i < n; ++i) theta_centers[i] = 0.5 * (rel[i] + rel[i + 1]) / len;

  out.v_tilde = interpolate_sorted(theta_nodes, state.v, out.theta);
  out.rho_tilde = interpolate_sorted(theta_centers, state.rho, out.theta);
  // End nodes coincide with the pistons exactly.
  out.v_tilde.front() = state.v.front();
  out.v_tilde.back() = state.v.back();
  return out;
}

NormTerms norm_terms(const SystemState& state, const GasModel& model) {
  const std::size_t n = state.cells();
  const double dm = state.mass_step();
  const double rs = model.rho_star();
  const double len = state.length();

  NormTerms t;
  t.pistons = state.v.front() * state.v.front() + state.v.back() * state.v.back();

  double sup = 0.0;
  for (double r : state.rho) sup = std::max(sup, std::abs(r - rs));
  t.density_sup = sup * sup;

  double v2 = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    v2 += w * state.v[i] * state.v[i] / node_density(state, i);
  }
  t.velocity_l2 = v2 * dm / len;

  double g2 = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = (state.rho[i] - state.rho[i - 1]) / dm;
    g2 += node_density(state, i) * d * d;
  }
  t.gradient_l2 = len * g2 * dm;
  return t;
}

double x_norm_deviation(const SystemState& state, const GasModel& model) {
  const NormTerms t = norm_terms(state, model);
  return std::sqrt(t.pistons) + std::sqrt(t.density_sup) + std::sqrt(t.velocity_l2) +
         std::sqrt(t.gradient_l2);
}

std::vector<ReconstructedPosition> reconstruct(std::span<const ProfileSample> series, double a0) {
  std::vector<ReconstructedPosition> out;
  out.reserve(series.size());
  double a = a0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& p = series[k].profile;
    if (p.rho_tilde.size() < 2 || p.theta.size() != p.rho_tilde.size() || p.v_tilde.empty()) {
      throw InvalidProfile("reconstruct: malformed profile at sample " + std::to_string(k));
    }
    if (k > 0) {
      const double dt = series[k].t - series[k - 1].t;
      a += 0.5 * (series[k - 1].profile.v_tilde.front() + p.v_tilde.front()) * dt;
    }
    double mean = 0.0;
    for (std::size_t j = 0; j + 1 < p.theta.size(); ++j) {
      mean += 0.5 * (p.rho_tilde[j] + p.rho_tilde[j + 1]) * (p.theta[j + 1] - p.theta[j]);
    }
    if (!(mean > 0.0)) {
      throw InvalidProfile("reconstruct: non-positive mean density at sample " + std::to_string(k));
    }
    out.push_back({series[k].t, a, a + 1.0 / mean});
  }
  return out;
}

SystemState make_initial_state(const InitialCondition& ic, const GasModel& model, std::size_t cells) {
  if (cells < 1) throw DomainError("initial state: at least one cell is required");
  if (!(ic.q_rho > 0.0) || !(ic.q_v > 0.0)) {
    throw DomainError("initial state: wave numbers q_rho, q_v must be > 0");
  }
  const double pi = std::numbers::pi;
  // Smallest value of 1 + eps cos(pi q theta) on [0, 1].
  const double min_cos = ic.q_rho >= 1.0 ? -1.0 : std::cos(pi * ic.q_rho);
  const double min_factor = ic.eps_rho >= 0.0 ? 1.0 + ic.eps_rho * min_cos : 1.0 + ic.eps_rho;
  if (!(min_factor > 0.0)) {
    std::ostringstream os;
    os << "initial state: eps_rho = " << ic.eps_rho << " gives a non-positive density";
    throw DomainError(os.str());
  }
  if (ic.length && !(*ic.length > 0.0)) throw DomainError("initial state: length must be > 0");

  const double rs = model.rho_star();
  const std::size_t n = cells;
  const double dm = 1.0 / static_cast<double>(n);

  SystemState s;
  s.a = ic.a0;
  s.rho.resize(n);
  s.v.resize(n + 1);
  auto velocity = [&](double theta) { return ic.eps_v * sin_pi(ic.q_v * theta) + ic.v_off; };

  std::vector<double> theta(n + 1);
  if (ic.eps_rho == 0.0) {
    const double uniform = ic.length ? 1.0 / *ic.length : rs;
    std::fill(s.rho.begin(), s.rho.end(), uniform);
    for (std::size_t i = 0; i <= n; ++i) theta[i] = static_cast<double>(i) * dm;
  } else {
    const double len = ic.length.value_or(1.0 / rs);
    const double wave = pi * ic.q_rho;
    // Normalized cumulative mass of the unscaled profile.
    auto cumulative = [&](double th) { return th + ic.eps_rho * sin_pi(ic.q_rho * th) / wave; };
    const double total = cumulative(1.0);
    theta[0] = 0.0;
    theta[n] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double target = static_cast<double>(i) * dm * total;
      double lo = theta[i - 1];
      double hi = 1.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (cumulative(mid) < target ? lo : hi) = mid;
      }
      theta[i] = 0.5 * (lo + hi);
    }
    for (std::size_t i = 0; i < n; ++i) s.rho[i] = dm / (len * (theta[i + 1] - theta[i]));
  }
  for (std::size_t i = 0; i <= n; ++i) s.v[i] = velocity(theta[i]);
  s.v.front() = velocity(0.0);
  s.v.back() = velocity(1.0);
  validate(s);
  return s;
}

}  // namespace piston
