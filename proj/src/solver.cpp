#include "piston/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "piston/lyapunov.hpp"

namespace piston {

void SolverConfig::validate() const {
  if (N < 4) throw ConfigError("solver.N", "cell count must be >= 4");
  if (!(cfl_acoustic > 0.0 && cfl_acoustic <= 1.0)) {
    throw ConfigError("solver.cfl_acoustic", "safety factor must be in (0, 1]");
  }
  if (!(cfl_viscous > 0.0 && cfl_viscous <= 1.0)) {
    throw ConfigError("solver.cfl_viscous", "safety factor must be in (0, 1]");
  }
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("solver.t_end", "must be > 0");
  if (!(output_every > 0.0)) throw ConfigError("solver.output_every", "must be > 0");
  if (!(dt_max > 0.0)) throw ConfigError("solver.dt_max", "must be > 0");
}

void semidiscrete_rhs(const SystemState& state, const GasModel& model, double u, StateRate& out) {
  const std::size_t n = state.cells();
  const double inv_dm = static_cast<double>(n);
  out.drho.resize(n);
  out.dv.resize(n + 1);
  out.da = state.v[0];

  const double* rho = state.rho.data();
  const double* v = state.v.data();
  double* dv = out.dv.data();
  double* drho = out.drho.data();

  double sigma_prev = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double p = 0.0;
    double mu = 0.0;
    model.pressure_and_viscosity(rho[j], p, mu);
    const double vm = (v[j + 1] - v[j]) * inv_dm;
    drho[j] = -rho[j] * rho[j] * vm;
    const double sigma = mu * rho[j] * vm - p;
    if (j == 0) {
      dv[0] = u + model.p_ext() + sigma;
    } else {
      dv[j] = (sigma - sigma_prev) * inv_dm;
    }
    sigma_prev = sigma;
  }
  dv[n] = -model.p_ext() - sigma_prev;
}

StateRate semidiscrete_rhs(const SystemState& state, const GasModel& model, double u) {
  validate(state);
  if (!std::isfinite(u)) throw DivergedState("rhs: non-finite control input");
  StateRate out;
  semidiscrete_rhs(state, model, u, out);
  return out;
}

double stable_dt(const SystemState& state, const GasModel& model, const SolverConfig& config) {
  const double dm = state.mass_step();
  double acoustic = 0.0;
  double viscous = 0.0;
  for (double r : state.rho) {
    acoustic = std::max(acoustic, r * std::sqrt(model.pressure_derivative(r)));
    viscous = std::max(viscous, model.viscosity(r) * r);
  }
  double dt = config.dt_max;
  if (acoustic > 0.0) dt = std::min(dt, config.cfl_acoustic * dm / acoustic);
  if (viscous > 0.0) dt = std::min(dt, config.cfl_viscous * dm * dm / (2.0 * viscous));
  return dt;
}

double total_momentum(const SystemState& state) {
  const std::size_t n = state.cells();
  double gas = 0.0;
  for (std::size_t i = 1; i < n; ++i) gas += state.v[i];
  return state.v.front() + state.v.back() + gas * state.mass_step();
}

Stepper::Stepper(std::size_t cells) { resize(cells); }

void Stepper::resize(std::size_t cells) {
  for (StateRate* k : {&k1_, &k2_, &k3_, &k4_}) {
    k->drho.resize(cells);
    k->dv.resize(cells + 1);
  }
  stage_.rho.resize(cells);
  stage_.v.resize(cells + 1);
}

namespace {

void axpy_state(const SystemState& base, const StateRate& k, double h, SystemState& out) {
  out.t = base.t + h;
  out.a = base.a + h * k.da;
  for (std::size_t j = 0; j < base.rho.size(); ++j) out.rho[j] = base.rho[j] + h * k.drho[j];
  for (std::size_t i = 0; i < base.v.size(); ++i) out.v[i] = base.v[i] + h * k.dv[i];
}

}  // namespace

StepDiagnostics Stepper::advance(SystemState& state, const GasModel& model,
                                 const ControlPolicy& policy, double dt) {
  const std::size_t n = state.cells();
  if (stage_.rho.size() != n) resize(n);
  if (!(dt > 0.0)) throw DomainError("step: dt must be > 0");

  const double u = control_input(policy, state.rho.front(), state.v.front(), model);
  if (!std::isfinite(u)) throw DivergedState("step: non-finite control input");

  semidiscrete_rhs(state, model, u, k1_);
  axpy_state(state, k1_, 0.5 * dt, stage_);
  semidiscrete_rhs(stage_, model, u, k2_);
  axpy_state(state, k2_, 0.5 * dt, stage_);
  semidiscrete_rhs(stage_, model, u, k3_);
  axpy_state(state, k3_, dt, stage_);
  semidiscrete_rhs(stage_, model, u, k4_);

  // Combine into the stage buffer so a rejected step leaves `state` intact.
  const double w = dt / 6.0;
  stage_.t = state.t + dt;
  stage_.a = state.a + w * (k1_.da + 2.0 * k2_.da + 2.0 * k3_.da + k4_.da);
  StepDiagnostics d;
  d.dt = dt;
  d.u = u;
  d.min_rho = HUGE_VAL;
  d.max_rho = -HUGE_VAL;
  for (std::size_t j = 0; j < n; ++j) {
    const double r =
        state.rho[j] + w * (k1_.drho[j] + 2.0 * k2_.drho[j] + 2.0 * k3_.drho[j] + k4_.drho[j]);
    stage_.rho[j] = r;
    d.min_rho = std::min(d.min_rho, r);
    d.max_rho = std::max(d.max_rho, r);
  }
  bool finite = std::isfinite(stage_.a) && std::isfinite(d.min_rho) && std::isfinite(d.max_rho);
  for (std::size_t i = 0; i <= n; ++i) {
    const double v = state.v[i] + w * (k1_.dv[i] + 2.0 * k2_.dv[i] + 2.0 * k3_.dv[i] + k4_.dv[i]);
    stage_.v[i] = v;
    finite = finite && std::isfinite(v);
  }
  if (!finite) {
    std::ostringstream os;
    os << "step: non-finite state after t = " << state.t;
    throw DivergedState(os.str());
  }
  if (!(d.min_rho > 0.0)) {
    std::ostringstream os;
    os << "step: density " << d.min_rho << " <= 0 after t = " << state.t << " (dt = " << dt
       << ", u = " << u << ")";
    throw DensityPositivityViolation(os.str());
  }
  std::swap(state.rho, stage_.rho);
  std::swap(state.v, stage_.v);
  state.a = stage_.a;
  state.t = stage_.t;

  const double inv_dm = static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    d.max_abs_vm = std::max(d.max_abs_vm, std::abs(state.v[j + 1] - state.v[j]) * inv_dm);
  }
  d.momentum = total_momentum(state);
  return d;
}

StepDiagnostics step(SystemState& state, const GasModel& model, const ControlPolicy& policy,
                     const SolverConfig& config) {
  validate(state);
  Stepper stepper(state.cells());
  return stepper.advance(state, model, policy, stable_dt(state, model, config));
}

TrajectorySample sample_state(const SystemState& state, const GasModel& model,
                              const ControlPolicy& policy, double r) {
  TrajectorySample s;
  s.t = state.t;
  s.a = state.a;
  s.b = state.b();
  s.adot = state.adot();
  s.bdot = state.bdot();
  s.u = control_input(policy, state.rho.front(), state.v.front(), model);
  const LyapunovReport rep = control_lyapunov(state, model, r, s.u);
  s.U = rep.U;
  s.E = rep.E;
  s.W = rep.W;
  s.V = rep.V;
  s.dE_dt = rep.dE_dt;
  s.dW_dt = rep.dW_dt;
  s.dV_dt = rep.dV_dt;
  s.xi = deviation_functional(state, model);
  s.x_norm = x_norm_deviation(state, model);
  s.momentum = total_momentum(state);
  const auto [lo, hi] = std::minmax_element(state.rho.begin(), state.rho.end());
  s.min_rho = *lo;
  s.max_rho = *hi;
  return s;
}

std::string TrajectoryRecord::status_text() const {
  if (status == RunStatus::Completed) return "completed";
  std::ostringstream os;
  os.precision(17);
  os << "diverged@" << diverged_at;
  return os.str();
}

TrajectoryRecord simulate(const SystemState& initial, const GasModel& model,
                          const ControlPolicy& policy, const SolverConfig& config,
                          const SimulateOptions& options) {
  config.validate();
  validate(initial);
  validate(policy);

  TrajectoryRecord rec;
  rec.r = clf_weight(policy, options.open_loop_weight);
  SystemState state = initial;
  Stepper stepper(state.cells());

  const double t0 = state.t;
  const auto outputs = static_cast<std::size_t>(std::ceil(config.t_end / config.output_every - 1e-9));
  rec.samples.reserve(outputs + 1);

  auto record = [&] {
    rec.samples.push_back(sample_state(state, model, policy, rec.r));
    if (options.on_sample) options.on_sample(state, rec.samples.back());
  };

  try {
    record();
    for (std::size_t k = 1; k <= outputs; ++k) {
      const double target = t0 + std::min(static_cast<double>(k) * config.output_every, config.t_end);
      while (state.t < target) {
        double dt = stable_dt(state, model, config);
        // Land exactly on the output time. The last two steps share the
        // remaining interval so no sliver step precedes a sample.
        const double remaining = target - state.t;
        if (remaining <= dt * (1.0 + 1e-6)) {
          dt = remaining;
        } else if (remaining < 2.0 * dt) {
          dt = 0.5 * remaining;
        }
        const StepDiagnostics d = stepper.advance(state, model, policy, dt);
        if (std::abs(state.t - target) <= 1e-12 * std::max(1.0, std::abs(target))) state.t = target;
        ++rec.steps;
        if (options.on_step) options.on_step(state, d);
      }
      record();
    }
  } catch (const DivergedState& e) {
    rec.status = RunStatus::Diverged;
    rec.diverged_at = state.t;
    rec.message = e.what();
  } catch (const DensityPositivityViolation& e) {
    rec.status = RunStatus::Diverged;
    rec.diverged_at = state.t;
    rec.message = e.what();
  }
  rec.final_state = std::move(state);
  return rec;
}

}  // namespace piston
