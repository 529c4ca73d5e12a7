#ifndef PISTON_SOLVER_HPP_
#define PISTON_SOLVER_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "piston/control.hpp"
#include "piston/gas_model.hpp"
#include "piston/state.hpp"

namespace piston {

struct SolverConfig {
  std::size_t N = 200;
  double cfl_acoustic = 0.5;
  double cfl_viscous = 0.9;
  double t_end = 5.0;
  double output_every = 0.01;
  double dt_max = 0.01;

  /// Throws ConfigError on N < 4, safety factors outside (0, 1] or
  /// non-positive times.
  void validate() const;
};

/// Time derivative of a SystemState: da/dt, d rho/dt per cell, dv/dt per node.
struct StateRate {
  double da = 0.0;
  std::vector<double> drho;
  std::vector<double> dv;
};

/// Method-of-lines right-hand side on the mass grid with cell stress
/// sigma_j = mu_j rho_j (v_{j+1} - v_j)/dm - P_j. The pistons feel
/// u + P_ext + sigma_0 (left) and -P_ext - sigma_{N-1} (right).
void semidiscrete_rhs(const SystemState& state, const GasModel& model, double u, StateRate& out);
StateRate semidiscrete_rhs(const SystemState& state, const GasModel& model, double u);

/// min(dt_max, cfl_a dm / max(rho sqrt(P')), cfl_v dm^2 / (2 max(mu rho))).
double stable_dt(const SystemState& state, const GasModel& model, const SolverConfig& config);

/// R = v_a + v_b + int rho v dx, with the gas integral summed over interior
/// nodes. This is the quadrature the scheme conserves exactly when u = 0.
double total_momentum(const SystemState& state);

struct StepDiagnostics {
  double dt = 0.0;
  double max_abs_vm = 0.0;  // max |v_m| over cells after the step
  double min_rho = 0.0;
  double max_rho = 0.0;
  double momentum = 0.0;
  double u = 0.0;           // input held over the step
};

/// Classical RK4 with preallocated stage buffers. The control input is
/// sampled from the pre-step state and held across stages.
class Stepper {
 public:
  explicit Stepper(std::size_t cells = 0);

  /// Advances `state` by dt. Throws DivergedState on non-finite values and
  /// DensityPositivityViolation when a density becomes non-positive; the
  /// state is left unchanged in both cases.
  StepDiagnostics advance(SystemState& state, const GasModel& model, const ControlPolicy& policy,
                          double dt);

 private:
  void resize(std::size_t cells);
  StateRate k1_, k2_, k3_, k4_;
  SystemState stage_;
};

/// One step of size stable_dt(state, model, config).
StepDiagnostics step(SystemState& state, const GasModel& model, const ControlPolicy& policy,
                     const SolverConfig& config);

struct TrajectorySample {
  double t = 0.0;
  double a = 0.0;
  double b = 0.0;
  double adot = 0.0;
  double bdot = 0.0;
  double u = 0.0;
  double U = 0.0;
  double E = 0.0;
  double W = 0.0;
  double V = 0.0;
  double dE_dt = 0.0;
  double dW_dt = 0.0;
  double dV_dt = 0.0;
  double xi = 0.0;
  double x_norm = 0.0;
  double momentum = 0.0;
  double min_rho = 0.0;
  double max_rho = 0.0;
};

/// Evaluates every sampled quantity at one state.
TrajectorySample sample_state(const SystemState& state, const GasModel& model,
                              const ControlPolicy& policy, double r);

enum class RunStatus { Completed, Diverged };

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;
  RunStatus status = RunStatus::Completed;
  double diverged_at = 0.0;
  std::string message;
  std::size_t steps = 0;
  double r = 0.0;  // weight used for V
  SystemState final_state;

  /// "completed" or "diverged@<t>".
  std::string status_text() const;
};

struct SimulateOptions {
  /// V weight for OpenLoop runs; other policies carry their own.
  double open_loop_weight = 1.0;
  /// Called after every accepted step with the new state.
  std::function<void(const SystemState&, const StepDiagnostics&)> on_step;
  /// Called at every output time (including t = 0) with the sampled state.
  std::function<void(const SystemState&, const TrajectorySample&)> on_sample;
};

/// Integrates to config.t_end, shortening steps to land on every multiple
/// of output_every. Divergence ends the run early with a partial record.
TrajectoryRecord simulate(const SystemState& initial, const GasModel& model,
                          const ControlPolicy& policy, const SolverConfig& config,
                          const SimulateOptions& options = {});

}  // namespace piston

#endif  // PISTON_SOLVER_HPP_
