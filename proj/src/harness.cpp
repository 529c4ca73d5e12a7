#include "piston/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "piston/csv_io.hpp"

namespace piston {

using nlohmann::json;

namespace {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs body(i) for i in [0, count) on up to `threads` workers.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(count, threads));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string power_law_text(PowerLawStatus s) {
  switch (s) {
    case PowerLawStatus::Satisfied: return "satisfied";
    case PowerLawStatus::NotSatisfied: return "not-satisfied";
    case PowerLawStatus::NotDeclared: return "not-declared";
  }
  return "not-declared";
}

json to_json(const LadderEvidence& e) {
  return {{"diverges", e.diverges},
          {"rho_at", e.rho_at},
          {"last_increment", finite_or_null(e.last_increment)},
          {"previous_increment", finite_or_null(e.previous_increment)},
          {"note", e.note}};
}

json to_json(const AssumptionHReport& h) {
  return {{"consistent", h.consistent},
          {"summary", h.summary},
          {"barrier_upper", to_json(h.barrier_upper)},
          {"barrier_lower", to_json(h.barrier_lower)},
          {"potential_upper", to_json(h.potential_upper)},
          {"power_law_condition", power_law_text(h.power_law)}};
}

json to_json(const KEstimate& k) {
  json j = {{"bounded", k.bounded},
            {"k_hat", finite_or_null(k.k_hat)},
            {"raw_sup", finite_or_null(k.raw_sup)},
            {"rho_at_sup", k.rho_at_sup},
            {"limit_at_rho_star", k.limit_at_rho_star},
            {"summary", k.summary}};
  if (k.analytic_lower_bound) {
    j["analytic_lower_bound"] = *k.analytic_lower_bound;
    j["satisfies_analytic_bound"] = k.satisfies_analytic_bound;
  }
  return j;
}

json to_json(const DecayFit& f) {
  return {{"degenerate", f.degenerate},
          {"note", f.note},
          {"sigma_hat", finite_or_null(f.sigma_hat)},
          {"M_hat", finite_or_null(f.M_hat)},
          {"r_squared", finite_or_null(f.r_squared)},
          {"window", {f.t_lo, f.t_hi}},
          {"samples", f.samples}};
}

json to_json(const IdentityResidual& r) {
  return {{"N", r.N},
          {"probes", r.probes},
          {"dE_rel_error", r.dE_rel_error},
          {"dW_rel_error", r.dW_rel_error},
          {"dE_abs_error", r.dE_abs_error},
          {"dW_abs_error", r.dW_abs_error},
          {"status", r.status}};
}

std::string policy_check(const ControlPolicy& p) {
  if (std::holds_alternative<FullFeedback>(p)) return "decomposition";
  if (std::holds_alternative<Friction>(p)) return "friction-bound";
  return "none";
}

}  // namespace

DecayFit fit_decay(std::span<const double> t, std::span<const double> V, double window_fraction,
                   std::span<const double> x_norm) {
  if (t.size() != V.size()) throw DomainError("fit_decay: t and V lengths differ");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw DomainError("fit_decay: window fraction must be in (0, 1]");
  }
  DecayFit fit;
  const std::size_t n = t.size();
  if (n == 0) {
    fit.degenerate = true;
    fit.note = "empty series";
    return fit;
  }
  const auto first = static_cast<std::size_t>(
      std::floor((1.0 - window_fraction) * static_cast<double>(n)));
  fit.t_lo = t[std::min(first, n - 1)];
  fit.t_hi = t[n - 1];

  std::vector<double> ts;
  std::vector<double> ys;
  for (std::size_t i = first; i < n; ++i) {
    if (V[i] > 0.0 && std::isfinite(V[i])) {
      ts.push_back(t[i]);
      ys.push_back(std::log(V[i]));
    }
  }
  fit.samples = ts.size();
  if (ts.size() < 10) {
    fit.degenerate = true;
    fit.note = ts.empty() ? "all-zero V in window" : "fewer than 10 positive V samples in window";
    return fit;
  }
  const double m = static_cast<double>(ts.size());
  double tbar = 0.0;
  double ybar = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tbar += ts[i];
    ybar += ys[i];
  }
  tbar /= m;
  ybar /= m;
  double stt = 0.0;
  double sty = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - tbar) * (ts[i] - tbar);
    sty += (ts[i] - tbar) * (ys[i] - ybar);
    syy += (ys[i] - ybar) * (ys[i] - ybar);
  }
  if (!(stt > 0.0)) {
    fit.degenerate = true;
    fit.note = "window spans a single time";
    return fit;
  }
  // ln V flat to roundoff: nothing to fit.
  if (syy <= 1e-24 * m * std::max(1.0, ybar * ybar)) {
    fit.degenerate = true;
    fit.note = "constant V";
    return fit;
  }
  const double slope = sty / stt;
  fit.sigma_hat = -slope;
  const double ss_res = std::max(0.0, syy - slope * sty);
  fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);

  if (x_norm.size() == n && x_norm[0] > 0.0) {
    double M = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      M = std::max(M, x_norm[i] * std::exp(0.5 * fit.sigma_hat * (t[i] - t[0])) / x_norm[0]);
    }
    fit.M_hat = M;
  }
  return fit;
}

RateIdentityProbe::RateIdentityProbe(const GasModel& model, const ControlPolicy& policy)
    : model_(&model), policy_(&policy) {}

void RateIdentityProbe::on_step(const SystemState& s) {
  if (pending_ && held_ >= 2) {
    const double h1 = prev1_.t - prev2_.t;
    const double h2 = s.t - prev1_.t;
    auto fd = [&](double f0, double f1, double f2) {
      return (h1 * h1 * (f2 - f1) + h2 * h2 * (f1 - f0)) / (h1 * h2 * (h1 + h2));
    };
    const double dE = fd(mechanical_energy(prev2_, *model_), mechanical_energy(prev1_, *model_),
                         mechanical_energy(s, *model_));
    const double dW = fd(transformed_energy(prev2_, *model_), transformed_energy(prev1_, *model_),
                         transformed_energy(s, *model_));
    const double u = control_input(*policy_, prev1_.rho.front(), prev1_.v.front(), *model_);
    const DissipationRates rates = dissipation_rates(prev1_, *model_, u, 1.0);
    err_E_ = std::max(err_E_, std::abs(dE - rates.dE_dt));
    err_W_ = std::max(err_W_, std::abs(dW - rates.dW_dt));
    scale_E_ = std::max(scale_E_, std::abs(rates.dE_dt));
    scale_W_ = std::max(scale_W_, std::abs(rates.dW_dt));
    ++probes_;
  }
  pending_ = false;
  std::swap(prev2_, prev1_);
  prev1_.t = s.t;
  prev1_.a = s.a;
  prev1_.rho.assign(s.rho.begin(), s.rho.end());
  prev1_.v.assign(s.v.begin(), s.v.end());
  held_ = std::min(held_ + 1, 2);
}

void RateIdentityProbe::on_sample(const SystemState& s) {
  pending_ = held_ >= 2 && prev1_.t == s.t;
}

IdentityResidual RateIdentityProbe::result(std::size_t cells) const {
  IdentityResidual r;
  r.N = cells;
  r.probes = probes_;
  r.dE_abs_error = err_E_;
  r.dW_abs_error = err_W_;
  r.dE_rel_error = scale_E_ > 0.0 ? err_E_ / scale_E_ : (err_E_ > 0.0 ? HUGE_VAL : 0.0);
  r.dW_rel_error = scale_W_ > 0.0 ? err_W_ / scale_W_ : (err_W_ > 0.0 ? HUGE_VAL : 0.0);
  return r;
}

MonotonicityAudit audit_monotonicity(const TrajectoryRecord& record, double tolerance_fraction) {
  MonotonicityAudit a;
  if (record.samples.empty()) return a;
  a.tolerance = tolerance_fraction * record.samples.front().V;
  for (std::size_t i = 0; i < record.samples.size(); ++i) {
    const auto& s = record.samples[i];
    a.max_rate = std::max(a.max_rate, s.dV_dt);
    if (s.dV_dt > 0.0) ++a.positive_rates;
    if (i == 0) continue;
    const double inc = s.V - record.samples[i - 1].V;
    a.worst_increase = std::max(a.worst_increase, inc);
    if (inc > a.tolerance) ++a.violations;
  }
  return a;
}

double dissipation_excess(const SystemState& state, const GasModel& model,
                          const ControlPolicy& policy, double r) {
  const DissipationTerms t = dissipation_terms(state, model);
  const double u = control_input(policy, state.rho.front(), state.v.front(), model);
  const double rate = dissipation_rates(t, u, r).dV_dt;
  if (const auto* f = std::get_if<FullFeedback>(&policy)) {
    const double c = (f->r + 1.0) * t.v_a + t.k_a;
    const double sum = -t.density - t.right_boundary - t.left_boundary - f->R * c * c -
                       r * t.velocity;
    return std::abs(rate - sum);
  }
  if (const auto* f = std::get_if<Friction>(&policy)) {
    const double bound = -f->R * t.v_a * t.v_a - 0.5 * t.left_boundary -
                         (t.density + t.right_boundary + r * t.velocity);
    return rate - bound;
  }
  return 0.0;
}

IdentityResidual measure_identity(const Scenario& scenario, std::size_t cells) {
  const GasModel model = build_gas(scenario.gas);
  const ControlPolicy policy = build_policy(scenario.controller, model);
  SolverConfig cfg = scenario.solver;
  cfg.N = cells;
  const SystemState initial = make_initial_state(scenario.initial, model, cells);
  RateIdentityProbe probe(model, policy);
  SimulateOptions opts;
  opts.open_loop_weight = scenario.controller.r.value_or(1.0);
  opts.on_step = [&](const SystemState& s, const StepDiagnostics&) { probe.on_step(s); };
  opts.on_sample = [&](const SystemState& s, const TrajectorySample&) { probe.on_sample(s); };
  const TrajectoryRecord rec = simulate(initial, model, policy, cfg, opts);
  IdentityResidual res = probe.result(cells);
  res.status = rec.status_text();
  return res;
}

RunResult run(const Scenario& scenario, const RunOptions& options) {
  const GasModel model = build_gas(scenario.gas);
  RunResult out;
  out.assumption_h = check_assumption_H(model);
  if (!out.assumption_h.consistent) {
    throw AssumptionHFailed("assumption (H) check failed: " + out.assumption_h.summary);
  }
  out.policy = build_policy(scenario.controller, model);
  const SolverConfig& cfg = scenario.solver;
  const DiagnosticsConfig& diag = scenario.diagnostics;
  const SystemState initial = make_initial_state(scenario.initial, model, cfg.N);

  std::optional<std::filesystem::path> profile_dir;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    profile_dir = *options.out_dir / "profiles";
    std::filesystem::create_directories(*profile_dir);
  }

  // Other refinement levels run alongside the main trajectory.
  std::vector<std::size_t> levels = diag.refinement_levels;
  if (levels.empty()) levels = {std::max<std::size_t>(4, cfg.N / 2), cfg.N, 2 * cfg.N};
  if (!options.identity) levels.clear();
  std::vector<IdentityResidual> side(levels.size());
  std::vector<std::size_t> side_jobs;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] != cfg.N) side_jobs.push_back(i);
  }
  std::exception_ptr side_error;
  std::mutex side_mutex;
  std::thread side_thread;
  if (!side_jobs.empty()) {
    const unsigned threads = std::max(1u, resolve_threads(options.threads) - 1);
    side_thread = std::thread([&, threads] {
      parallel_for(side_jobs.size(), threads, [&](std::size_t k) {
        const std::size_t idx = side_jobs[k];
        try {
          side[idx] = measure_identity(scenario, levels[idx]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(side_mutex);
          if (!side_error) side_error = std::current_exception();
        }
      });
    });
  }

  RateIdentityProbe probe(model, out.policy);
  const bool probe_main =
      std::find(levels.begin(), levels.end(), cfg.N) != levels.end();
  double observed_min = HUGE_VAL;
  double observed_max = -HUGE_VAL;
  double impulse = 0.0;
  double next_profile = 0.0;
  std::size_t profile_index = 0;
  double last_profile_t = -HUGE_VAL;
  double max_length_residual = 0.0;
  out.dissipation.check = policy_check(out.policy);
  const double r_weight = clf_weight(out.policy, scenario.controller.r.value_or(1.0));
  double excess_scale = 0.0;
  std::vector<double> excesses;

  auto write_profile = [&](const SystemState& s) {
    char name[64];
    std::snprintf(name, sizeof name, "profile_%05zu.csv", profile_index++);
    write_profile_csv(*profile_dir / name, s);
    last_profile_t = s.t;
  };

  for (double r : initial.rho) {
    observed_min = std::min(observed_min, r);
    observed_max = std::max(observed_max, r);
  }

  SimulateOptions opts;
  opts.open_loop_weight = scenario.controller.r.value_or(1.0);
  opts.on_step = [&](const SystemState& s, const StepDiagnostics& d) {
    observed_min = std::min(observed_min, d.min_rho);
    observed_max = std::max(observed_max, d.max_rho);
    impulse += d.u * d.dt;
    if (probe_main) probe.on_step(s);
  };
  opts.on_sample = [&](const SystemState& s, const TrajectorySample& smp) {
    if (probe_main) probe.on_sample(s);
    excesses.push_back(dissipation_excess(s, model, out.policy, r_weight));
    excess_scale = std::max(excess_scale, std::abs(smp.dV_dt));
    double sum = 0.0;
    for (double r : s.rho) sum += s.mass_step() / r;
    max_length_residual = std::max(max_length_residual, std::abs((smp.b - smp.a) - sum));
    if (profile_dir && s.t >= next_profile - 1e-9 * diag.profile_every) {
      write_profile(s);
      while (next_profile <= s.t + 1e-9 * diag.profile_every) next_profile += diag.profile_every;
    }
  };

  out.record = simulate(initial, model, out.policy, cfg, opts);
  out.r = out.record.r;
  if (profile_dir && out.record.final_state.t != last_profile_t) write_profile(out.record.final_state);

  if (side_thread.joinable()) side_thread.join();
  if (side_error) std::rethrow_exception(side_error);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == cfg.N) {
      side[i] = probe.result(cfg.N);
      side[i].status = out.record.status_text();
    }
  }
  out.identity = std::move(side);

  // Audits.
  const auto& samples = out.record.samples;
  out.monotonicity = audit_monotonicity(out.record, diag.monotonicity_tolerance);

  // Roundoff allowance relative to the largest rate seen in the run.
  out.dissipation.tolerance = 1e-10 * excess_scale;
  out.dissipation.samples = excesses.size();
  if (!excesses.empty()) {
    out.dissipation.worst_excess = *std::max_element(excesses.begin(), excesses.end());
  }
  for (double e : excesses) {
    if (e > out.dissipation.tolerance) ++out.dissipation.violations;
  }

  out.barrier.observed_min = observed_min;
  out.barrier.observed_max = observed_max;
  try {
    out.barrier.bounds = barrier_bounds(model, samples.front().V, out.r);
    out.barrier.available = true;
    out.barrier.satisfied = observed_min >= out.barrier.bounds.rho_min * (1.0 - 1e-6) &&
                            observed_max <= out.barrier.bounds.rho_max * (1.0 + 1e-6);
  } catch (const BarrierUnavailable& e) {
    out.barrier.note = e.what();
  }

  std::vector<double> ts;
  std::vector<double> vs;
  std::vector<double> xs;
  for (const auto& s : samples) {
    ts.push_back(s.t);
    vs.push_back(s.V);
    xs.push_back(s.x_norm);
  }
  out.fit = fit_decay(ts, vs, diag.fit_window_fraction, xs);

  out.conservation.momentum_initial = samples.front().momentum;
  out.conservation.momentum_final = total_momentum(out.record.final_state);
  out.conservation.drift =
      std::abs(out.conservation.momentum_final - out.conservation.momentum_initial);
  out.conservation.input_impulse = impulse;
  out.conservation.balance_residual = std::abs(out.conservation.momentum_final -
                                               out.conservation.momentum_initial - impulse);
  out.conservation.max_length_residual = max_length_residual;

  // Report.
  json& rep = out.report;
  rep["status"] = out.record.status_text();
  if (!out.record.message.empty()) rep["message"] = out.record.message;
  rep["steps"] = out.record.steps;
  rep["samples"] = samples.size();
  rep["controller"] = policy_name(out.policy);
  rep["r"] = out.r;
  if (const auto* f = std::get_if<Friction>(&out.policy)) {
    rep["friction"] = {{"R", f->R}, {"r_analysis", f->r_analysis}, {"K_used", f->K_used}};
  }
  rep["rho_star"] = model.rho_star();
  rep["assumption_H"] = to_json(out.assumption_h);
  rep["V0"] = samples.front().V;
  rep["V_end"] = samples.back().V;
  rep["monotonicity"] = {{"violations", out.monotonicity.violations},
                         {"worst_increase", out.monotonicity.worst_increase},
                         {"tolerance", out.monotonicity.tolerance},
                         {"positive_rate_samples", out.monotonicity.positive_rates},
                         {"max_dV_dt", finite_or_null(out.monotonicity.max_rate)}};
  rep["dissipation"] = {{"check", out.dissipation.check},
                        {"samples", out.dissipation.samples},
                        {"worst_excess", out.dissipation.worst_excess},
                        {"tolerance", out.dissipation.tolerance},
                        {"violations", out.dissipation.violations}};
  json barrier = {{"available", out.barrier.available},
                  {"S", samples.front().V},
                  {"observed_min", observed_min},
                  {"observed_max", observed_max}};
  if (out.barrier.available) {
    const auto& b = out.barrier.bounds;
    barrier["rho_min"] = b.rho_min;
    barrier["rho_max"] = b.rho_max;
    barrier["rho_1"] = b.rho_1;
    barrier["rho_2"] = b.rho_2;
    barrier["rho_3"] = b.rho_3;
    barrier["satisfied"] = out.barrier.satisfied;
  } else {
    barrier["note"] = out.barrier.note;
  }
  rep["barrier"] = barrier;
  rep["decay_fit"] = to_json(out.fit);
  json ids = json::array();
  for (const auto& r : out.identity) ids.push_back(to_json(r));
  rep["rate_identity"] = ids;
  rep["conservation"] = {{"momentum_initial", out.conservation.momentum_initial},
                         {"momentum_final", out.conservation.momentum_final},
                         {"momentum_drift", out.conservation.drift},
                         {"input_impulse", out.conservation.input_impulse},
                         {"momentum_balance_residual", out.conservation.balance_residual},
                         {"max_length_residual", out.conservation.max_length_residual}};

  if (options.out_dir) {
    write_trajectory_csv(*options.out_dir / "trajectory.csv", out.record);
    std::ofstream os(*options.out_dir / "report.json");
    if (!os) throw ConfigError((*options.out_dir / "report.json").string(), "cannot open for writing");
    os << rep.dump(2) << '\n';
  }
  return out;
}

SweepAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= text.size()) {
    throw ConfigError("--axis " + text, "expected <dotted.path>=v1,v2,...");
  }
  SweepAxis axis;
  axis.path = text.substr(0, eq);
  std::istringstream is(text.substr(eq + 1));
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) throw ConfigError("--axis " + text, "empty value");
    json v = json::parse(item, nullptr, false);
    if (v.is_discarded() || v.is_structured()) v = item;
    axis.values.push_back(std::move(v));
  }
  if (axis.values.empty()) throw ConfigError("--axis " + text, "no values");
  return axis;
}

namespace {

void set_path(json& doc, const std::string& path, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(path, "empty path component");
    if (!node->is_object()) throw ConfigError(path, "path crosses a non-object field");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key)) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::string cell_value_text(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::vector<SweepRow> sweep(const json& tmpl, const std::vector<SweepAxis>& axes,
                            const std::optional<std::filesystem::path>& out_dir, unsigned threads) {
  std::size_t cells = 1;
  for (const auto& a : axes) {
    if (a.values.empty()) throw ConfigError(a.path, "axis has no values");
    cells *= a.values.size();
  }
  std::vector<SweepRow> rows(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    rows[c].cell = c;
    std::size_t rem = c;
    rows[c].values.resize(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      rows[c].values[k] = axes[k].values[rem % axes[k].values.size()];
      rem /= axes[k].values.size();
    }
  }
  if (out_dir) std::filesystem::create_directories(*out_dir);

  const unsigned workers = resolve_threads(threads);
  parallel_for(cells, workers, [&](std::size_t c) {
    SweepRow& row = rows[c];
    try {
      json doc = tmpl;
      for (std::size_t k = 0; k < axes.size(); ++k) set_path(doc, axes[k].path, row.values[k]);
      Scenario sc;
      try {
        sc = parse_scenario(doc);
      } catch (const ConfigError& e) {
        row.status = "invalid-config";
        row.message = e.what();
        return;
      }
      RunOptions opts;
      // Cells already run in parallel; identity levels stay on this worker.
      opts.threads = 1;
      if (out_dir) {
        char name[32];
        std::snprintf(name, sizeof name, "cell_%04zu", c);
        opts.out_dir = *out_dir / name;
      }
      RunResult res;
      try {
        res = run(sc, opts);
      } catch (const InvalidGasModel& e) {
        row.status = "assumption-H-check-failed";
        row.message = e.what();
        return;
      } catch (const AssumptionHFailed& e) {
        row.status = "assumption-H-check-failed";
        row.message = e.what();
        return;
      }
      row.status = res.record.status_text();
      row.message = res.record.message;
      row.sigma_hat = res.fit.degenerate ? std::nan("") : res.fit.sigma_hat;
      row.M_hat = res.fit.M_hat;
      row.r_squared = res.fit.degenerate ? std::nan("") : res.fit.r_squared;
      row.violations = res.monotonicity.violations;
      row.V0 = res.record.samples.front().V;
      row.V_end = res.record.samples.back().V;
    } catch (const std::exception& e) {
      row.status = "error";
      row.message = e.what();
    }
  });
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepAxis>& axes,
                     const std::vector<SweepRow>& rows) {
  std::ofstream os(path);
  if (!os) throw ConfigError(path.string(), "cannot open for writing");
  auto num = [](double x) { return std::isfinite(x) ? format_double(x) : std::string(); };
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  os << "cell";
  for (const auto& a : axes) os << ',' << quote(a.path);
  os << ",status,sigma_hat,M_hat,r_squared,violations,V0,V_end,message\n";
  for (const auto& r : rows) {
    os << r.cell;
    for (const auto& v : r.values) os << ',' << quote(cell_value_text(v));
    os << ',' << r.status << ',' << num(r.sigma_hat) << ',' << num(r.M_hat) << ','
       << num(r.r_squared) << ',' << r.violations << ',' << num(r.V0) << ',' << num(r.V_end) << ','
       << quote(r.message) << '\n';
  }
}

GasCheck check_gas(const json& block) {
  GasCheck out;
  const GasSpec spec = parse_gas(block);
  json& rep = out.report;
  std::optional<GasModel> model;
  try {
    model.emplace(build_gas(spec));
  } catch (const InvalidGasModel& e) {
    rep["accepted"] = false;
    rep["error"] = e.what();
    return out;
  }
  out.accepted = true;
  rep["accepted"] = true;
  rep["kind"] = std::holds_alternative<IdealGas>(spec.law) ? "ideal" : "tabulated";
  rep["P_ext"] = spec.p_ext;
  rep["rho_star"] = model->rho_star();
  rep["P_at_rho_star"] = model->pressure(model->rho_star());
  const AssumptionHReport h = check_assumption_H(*model);
  rep["assumption_H"] = to_json(h);
  const KEstimate k = estimate_K(*model);
  rep["K"] = to_json(k);
  rep["power_law_condition"] = power_law_text(h.power_law);
  out.passed = h.consistent && k.bounded && k.satisfies_analytic_bound;
  rep["passed"] = out.passed;
  return out;
}

}  // namespace piston
