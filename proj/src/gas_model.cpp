#include "piston/gas_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace piston {

namespace {

constexpr double kDivergenceRatio = 0.9;

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// Log-log piecewise-linear table shared by the three generated callables.
struct LogTable {
  std::vector<double> log_rho, log_p, log_mu;

  // Segment index for log-density s; end segments extend to +-infinity.
  std::size_t segment(double s) const {
    auto it = std::upper_bound(log_rho.begin(), log_rho.end(), s);
    std::size_t i = static_cast<std::size_t>(it - log_rho.begin());
    if (i == 0) return 0;
    return std::min(i - 1, log_rho.size() - 2);
  }
  double slope(const std::vector<double>& y, std::size_t i) const {
    return (y[i + 1] - y[i]) / (log_rho[i + 1] - log_rho[i]);
  }
  double eval(const std::vector<double>& y, double rho) const {
    const double s = std::log(rho);
    const std::size_t i = segment(s);
    return std::exp(y[i] + slope(y, i) * (s - log_rho[i]));
  }
};

void require_positive_density(double rho, const char* what) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    std::ostringstream os;
    os << what << ": density must be positive and finite (got " << rho << ")";
    throw DomainError(os.str());
  }
}

double law_pressure(const GasLaw& law, double rho) {
  if (const auto* g = std::get_if<IdealGas>(&law)) return g->c * std::pow(rho, g->gamma);
  return std::get<GenericGas>(law).pressure(rho);
}

void validate_ideal(const IdealGas& g) {
  if (!finite_positive(g.c)) throw InvalidGasModel("ideal gas: c must be > 0");
  if (!finite_positive(g.A)) throw InvalidGasModel("ideal gas: A must be > 0");
  if (!(g.gamma > 1.0 && g.gamma < 2.0)) {
    std::ostringstream os;
    os << "ideal gas: gamma must lie in (1,2) (got " << g.gamma << ")";
    throw InvalidGasModel(os.str());
  }
}

// Samples the generic law over a wide geometric range around `center`.
void validate_generic_samples(const GenericGas& g, double center) {
  double prev_p = 0.0;
  for (int j = -24; j <= 24; ++j) {
    const double rho = center * std::pow(10.0, 0.25 * j);
    const double p = g.pressure(rho);
    const double dp = g.pressure_derivative(rho);
    const double mu = g.viscosity(rho);
    if (!finite_positive(p) || !finite_positive(dp) || !finite_positive(mu) || p <= prev_p) {
      std::ostringstream os;
      os << "generic gas: P must be positive and strictly increasing and mu positive; "
            "violated at rho = "
         << rho;
      throw InvalidGasModel(os.str());
    }
    prev_p = p;
  }
}

}  // namespace

GenericGas tabulated_gas(std::vector<GasSample> samples) {
  if (samples.size() < 2) throw InvalidGasModel("tabulated gas needs at least two samples");
  auto table = std::make_shared<LogTable>();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!finite_positive(s.rho) || !finite_positive(s.pressure) || !finite_positive(s.viscosity)) {
      throw InvalidGasModel("tabulated gas: samples must be positive and finite (row " +
                            std::to_string(i) + ")");
    }
    if (i > 0 && (s.rho <= samples[i - 1].rho || s.pressure <= samples[i - 1].pressure)) {
      throw InvalidGasModel("tabulated gas: rho and P must be strictly increasing (row " +
                            std::to_string(i) + ")");
    }
    table->log_rho.push_back(std::log(s.rho));
    table->log_p.push_back(std::log(s.pressure));
    table->log_mu.push_back(std::log(s.viscosity));
  }

  GenericGas gas;
  gas.pressure = [table](double rho) { return table->eval(table->log_p, rho); };
  gas.viscosity = [table](double rho) { return table->eval(table->log_mu, rho); };
  gas.pressure_derivative = [table](double rho) {
    const std::size_t i = table->segment(std::log(rho));
    return table->eval(table->log_p, rho) * table->slope(table->log_p, i) / rho;
  };
  return gas;
}

double solve_rho_star(const GasLaw& law, double p_ext) {
  if (!finite_positive(p_ext)) throw InvalidGasModel("P_ext must be > 0");
  if (const auto* g = std::get_if<IdealGas>(&law)) {
    return std::pow(p_ext / g->c, 1.0 / g->gamma);
  }

  auto f = [&](double rho) { return law_pressure(law, rho) - p_ext; };
  double lo = 1.0;
  double hi = 1.0;
  constexpr int kMaxExpansions = 1100;
  int n = 0;
  if (f(1.0) < 0.0) {
    hi = 2.0;
    while (f(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++n > kMaxExpansions || !std::isfinite(hi)) {
        throw InvalidGasModel("rho*: bracket expansion failed (P does not reach P_ext)");
      }
    }
  } else {
    lo = 0.5;
    while (f(lo) > 0.0) {
      hi = lo;
      lo *= 0.5;
      if (++n > kMaxExpansions || lo == 0.0) {
        throw InvalidGasModel("rho*: bracket expansion failed (P does not fall below P_ext)");
      }
    }
  }
  // Bisection to full double resolution (well inside 1e-12 relative).
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  const double lo_res = std::abs(f(lo));
  const double hi_res = std::abs(f(hi));
  return lo_res <= hi_res ? lo : hi;
}

GasModel::GasModel(GasLaw law, double p_ext, QuadratureConfig quadrature)
    : law_(std::move(law)), p_ext_(p_ext), quad_(quadrature) {
  quad_.validate();
  if (!finite_positive(p_ext)) throw InvalidGasModel("P_ext must be > 0");
  if (auto* g = std::get_if<IdealGas>(&law_)) {
    validate_ideal(*g);
    is_ideal_ = true;
    ideal_ = *g;
    half_gm1_ = 0.5 * (g->gamma - 1.0);
  } else {
    const auto& gen = std::get<GenericGas>(law_);
    if (!gen.pressure || !gen.pressure_derivative || !gen.viscosity) {
      throw InvalidGasModel("generic gas: P, dP and mu must all be provided");
    }
    validate_generic_samples(gen, 1.0);
  }
  rho_star_ = solve_rho_star(law_, p_ext_);
  if (!is_ideal_) validate_generic_samples(std::get<GenericGas>(law_), rho_star_);
}

GasModel GasModel::ideal(double c, double gamma, double A, double p_ext) {
  return GasModel(IdealGas{c, gamma, A}, p_ext);
}

double GasModel::pressure(double rho) const {
  if (is_ideal_) return ideal_.c * std::pow(rho, ideal_.gamma);
  return std::get<GenericGas>(law_).pressure(rho);
}

double GasModel::pressure_derivative(double rho) const {
  if (is_ideal_) return ideal_.c * ideal_.gamma * std::pow(rho, ideal_.gamma - 1.0);
  return std::get<GenericGas>(law_).pressure_derivative(rho);
}

double GasModel::viscosity(double rho) const {
  if (is_ideal_) return ideal_.A * std::pow(rho, half_gm1_);
  return std::get<GenericGas>(law_).viscosity(rho);
}

double GasModel::potential_energy_density(double rho) const {
  require_positive_density(rho, "Q");
  if (rho == rho_star_) return 0.0;
  if (is_ideal_) {
    const double g = ideal_.gamma;
    const double d = std::log(rho / rho_star_);
    const double scale = ideal_.c * std::pow(rho_star_, g) / (g - 1.0);
    return std::max(0.0, scale * (std::expm1(g * d) - g * std::expm1(d)));
  }
  // Equivalent cancellation-free form: rho * int (P(t) - P(rho*)) / t^2 dt.
  const auto& gen = std::get<GenericGas>(law_);
  const double p_star = gen.pressure(rho_star_);
  auto integrand = [&](double t) { return (gen.pressure(t) - p_star) / (t * t); };
  const double integral =
      require_converged(adaptive_simpson_log(integrand, rho_star_, rho, quad_), "Q");
  return std::max(0.0, rho * integral);
}

double GasModel::viscous_potential(double rho) const {
  require_positive_density(rho, "k");
  if (rho == rho_star_) return 0.0;
  if (is_ideal_) {
    return 2.0 * ideal_.A / (ideal_.gamma - 1.0) * std::pow(rho_star_, half_gm1_) *
           std::expm1(half_gm1_ * std::log(rho / rho_star_));
  }
  const auto& gen = std::get<GenericGas>(law_);
  auto integrand = [&](double t) { return gen.viscosity(t) / t; };
  return require_converged(adaptive_simpson_log(integrand, rho_star_, rho, quad_), "k");
}

double GasModel::barrier_function(double rho) const {
  require_positive_density(rho, "G");
  if (rho == rho_star_) return 0.0;
  auto integrand = [&](double l) {
    return viscosity(l) * std::pow(l, -1.5) * std::sqrt(potential_energy_density(l));
  };
  return require_converged(adaptive_simpson_log(integrand, rho_star_, rho, quad_), "G");
}

bool shows_divergence(double previous, double middle, double last) {
  const double d_prev = middle - previous;
  const double d_last = last - middle;
  return std::isfinite(d_last) && d_last > 0.0 && d_last >= kDivergenceRatio * d_prev;
}

namespace {

LadderEvidence ladder_evidence(double rho_at, double previous, double middle, double last,
                               const char* what) {
  LadderEvidence ev;
  ev.rho_at = rho_at;
  ev.previous_increment = std::abs(middle - previous);
  ev.last_increment = std::abs(last - middle);
  ev.diverges = shows_divergence(previous, middle, last);
  std::ostringstream os;
  os << what << (ev.diverges ? ": divergence evidence" : ": violation evidence at rho = ")
     << (ev.diverges ? "" : std::to_string(rho_at));
  ev.note = os.str();
  return ev;
}

PowerLawStatus power_law_status(const GasModel& model, const std::vector<double>& ladder) {
  PowerLawBounds b;
  if (const auto* g = model.ideal_params()) {
    b = {g->c, g->gamma, g->A, 0.5 * (g->gamma - 1.0)};
  } else {
    const auto& gen = std::get<GenericGas>(model.law());
    if (!gen.bounds) return PowerLawStatus::NotDeclared;
    b = *gen.bounds;
  }
  if (!(b.gamma > 1.0 && b.gamma < 2.0) || !(b.eta >= 0.0 && b.eta <= 0.5) || !(b.c > 0.0) ||
      !(b.A > 0.0)) {
    return PowerLawStatus::NotSatisfied;
  }
  constexpr double kSlack = 1e-12;
  for (double rho : ladder) {
    if (model.pressure(rho) < b.c * std::pow(rho, b.gamma) * (1.0 - kSlack) ||
        model.viscosity(rho) < b.A * std::pow(rho, b.eta) * (1.0 - kSlack)) {
      return PowerLawStatus::NotSatisfied;
    }
  }
  return PowerLawStatus::Satisfied;
}

}  // namespace

AssumptionHReport check_assumption_H(const GasModel& model, const DensityLadder& ladder) {
  if (ladder.decades_below < 6 || ladder.decades_above < 6) {
    throw DomainError("density ladder must span at least [rho*/1e6, rho* x 1e6]");
  }
  AssumptionHReport rep;
  const double rs = model.rho_star();
  for (int j = -ladder.decades_below; j <= ladder.decades_above; ++j) {
    rep.ladder.push_back(rs * std::pow(10.0, j));
  }
  const std::size_t n = rep.ladder.size();
  std::string failure;
  try {
    for (double rho : rep.ladder) {
      rep.barrier_values.push_back(model.barrier_function(rho));
      rep.potential_values.push_back(model.viscous_potential(rho));
    }
  } catch (const Error& e) {
    failure = e.what();
  }

  if (failure.empty()) {
    const auto& G = rep.barrier_values;
    const auto& k = rep.potential_values;
    rep.barrier_upper = ladder_evidence(rep.ladder[n - 1], G[n - 3], G[n - 2], G[n - 1], "G upper");
    rep.barrier_lower = ladder_evidence(rep.ladder[0], -G[2], -G[1], -G[0], "G lower");
    rep.potential_upper = ladder_evidence(rep.ladder[n - 1], k[n - 3], k[n - 2], k[n - 1], "k upper");
    rep.consistent =
        rep.barrier_upper.diverges && rep.barrier_lower.diverges && rep.potential_upper.diverges;
  } else {
    rep.consistent = false;
  }
  rep.power_law = power_law_status(model, rep.ladder);

  std::ostringstream os;
  if (!failure.empty()) {
    os << "violation evidence: evaluation failed (" << failure << ")";
  } else if (rep.consistent) {
    os << "consistent with the divergence conditions on G and k";
  } else {
    os << "violation evidence:";
    for (const auto* ev : {&rep.barrier_upper, &rep.barrier_lower, &rep.potential_upper}) {
      if (!ev->diverges) os << " [" << ev->note << "]";
    }
  }
  rep.summary = os.str();
  return rep;
}

KEstimate estimate_K(const GasModel& model, std::span<const double> densities,
                     double safety_factor, double near_tolerance) {
  if (densities.empty()) throw DomainError("estimate_K needs at least one density");
  if (!(safety_factor >= 1.0)) throw DomainError("estimate_K: safety factor must be >= 1");
  KEstimate est;
  const double rs = model.rho_star();
  const double p_ext = model.p_ext();
  est.limit_at_rho_star = model.viscosity(rs) / (rs * model.pressure_derivative(rs));

  std::vector<double> rho(densities.begin(), densities.end());
  std::sort(rho.begin(), rho.end());
  std::vector<double> ratio;
  ratio.reserve(rho.size());
  for (double r : rho) {
    require_positive_density(r, "estimate_K");
    double q;
    if (std::abs(r / rs - 1.0) < near_tolerance) {
      q = est.limit_at_rho_star;
    } else {
      q = std::abs(model.viscous_potential(r)) / std::abs(model.pressure(r) - p_ext);
    }
    ratio.push_back(q);
    if (q > est.raw_sup) {
      est.raw_sup = q;
      est.rho_at_sup = r;
    }
  }

  est.bounded = true;
  const std::size_t n = ratio.size();
  std::ostringstream os;
  // Growth is judged over decades: adjacent grid points of a bounded,
  // slowly saturating ratio have nearly equal increments.
  auto decade_up = [&](std::size_t i) {
    std::size_t j = i;
    while (j + 1 < n && rho[j] < 10.0 * rho[i]) ++j;
    return j;
  };
  auto decade_down = [&](std::size_t i) {
    std::size_t j = i;
    while (j > 0 && rho[j] > 0.1 * rho[i]) --j;
    return j;
  };
  if (n >= 3) {
    const std::size_t l1 = decade_up(0), l2 = decade_up(l1);
    const std::size_t h1 = decade_down(n - 1), h2 = decade_down(h1);
    if (l2 > l1 && l1 > 0 && shows_divergence(ratio[l2], ratio[l1], ratio[0])) {
      est.bounded = false;
      os << "ratio |k|/|P-P_ext| grows without bound toward rho = " << rho[0];
    } else if (h2 < h1 && h1 < n - 1 && shows_divergence(ratio[h2], ratio[h1], ratio[n - 1])) {
      est.bounded = false;
      os << "ratio |k|/|P-P_ext| grows without bound toward rho = " << rho[n - 1];
    }
  }
  est.k_hat = safety_factor * est.raw_sup;

  if (const auto* g = model.ideal_params()) {
    est.analytic_lower_bound =
        2.0 * g->A / ((g->gamma - 1.0) * g->c) * std::pow(rs, -0.5 * (g->gamma + 1.0));
    est.satisfies_analytic_bound = est.k_hat > *est.analytic_lower_bound;
  }
  if (est.bounded) {
    os << "K_hat = " << est.k_hat << " (grid sup " << est.raw_sup << " at rho = " << est.rho_at_sup
       << ")";
    if (est.analytic_lower_bound) {
      os << "; ideal-gas lower bound " << *est.analytic_lower_bound
         << (est.satisfies_analytic_bound ? " satisfied" : " NOT satisfied");
    }
  }
  est.summary = os.str();
  return est;
}

KEstimate estimate_K(const GasModel& model, const KGrid& grid) {
  if (grid.points_per_decade < 1) throw DomainError("estimate_K: points_per_decade must be >= 1");
  std::vector<double> rho;
  const int lo = -grid.decades_below * grid.points_per_decade;
  const int hi = grid.decades_above * grid.points_per_decade;
  for (int j = lo; j <= hi; ++j) {
    rho.push_back(model.rho_star() * std::pow(10.0, static_cast<double>(j) / grid.points_per_decade));
  }
  return estimate_K(model, rho, grid.safety_factor, grid.near_tolerance);
}

}  // namespace piston
