#ifndef PISTON_HARNESS_HPP_
#define PISTON_HARNESS_HPP_

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "piston/lyapunov.hpp"
#include "piston/scenario.hpp"
#include "piston/solver.hpp"

namespace piston {

/// Least-squares fit of ln V = alpha - sigma t over the trailing window.
struct DecayFit {
  bool degenerate = false;
  std::string note;
  double sigma_hat = 0.0;
  double M_hat = std::numeric_limits<double>::quiet_NaN();
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t samples = 0;
};

/// Fits the trailing `window_fraction` of the samples. Needs at least 10
/// positive V values there; otherwise, or for a constant series, the fit is
/// flagged degenerate. With an X-norm series, M_hat is the smallest M with
/// ||.||_X(t) <= M exp(-sigma_hat t / 2) ||.||_X(0) on every sample.
DecayFit fit_decay(std::span<const double> t, std::span<const double> V, double window_fraction,
                   std::span<const double> x_norm = {});

/// Centered finite differences of E and W against the analytic rates.
struct IdentityResidual {
  std::size_t N = 0;
  std::size_t probes = 0;
  double dE_rel_error = 0.0;  // max |FD - analytic| / max |analytic|
  double dW_rel_error = 0.0;
  double dE_abs_error = 0.0;
  double dW_abs_error = 0.0;
  std::string status = "completed";
};

/// Simulation observer that probes the rate identities at every output
/// sample except the first and last. The difference quotient is the
/// second-order three-point formula on the solver steps around the sample.
class RateIdentityProbe {
 public:
  RateIdentityProbe(const GasModel& model, const ControlPolicy& policy);

  void on_step(const SystemState& state);
  void on_sample(const SystemState& state);
  IdentityResidual result(std::size_t cells) const;

 private:
  const GasModel* model_;
  const ControlPolicy* policy_;
  SystemState prev2_;
  SystemState prev1_;
  int held_ = 0;
  bool pending_ = false;
  std::size_t probes_ = 0;
  double err_E_ = 0.0;
  double err_W_ = 0.0;
  double scale_E_ = 0.0;
  double scale_W_ = 0.0;
};

struct MonotonicityAudit {
  std::size_t violations = 0;  // V increases above the tolerance
  double worst_increase = 0.0;
  double tolerance = 0.0;      // absolute: fraction * V(0)
  std::size_t positive_rates = 0;  // samples with analytic dV/dt > 0
  double max_rate = -std::numeric_limits<double>::infinity();
};

MonotonicityAudit audit_monotonicity(const TrajectoryRecord& record, double tolerance_fraction);

struct BarrierAudit {
  bool available = false;
  std::string note;
  BarrierBounds bounds;
  double observed_min = 0.0;  // over every accepted step
  double observed_max = 0.0;
  bool satisfied = false;
};

/// Per-sample check of the dissipation structure. For FullFeedback the
/// rate must equal the sum of its five non-positive terms; for Friction it
/// must not exceed -R v_a^2 - k_a (P_a - P_ext)/2 - (D_rho + k_b (P_b - P_ext) + r D_v).
struct DissipationAudit {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;  // max(rate - bound), <= 0 when satisfied
  double tolerance = 0.0;
  std::string check;  // "none", "decomposition" or "friction-bound"
};

/// One sample's bound check. Returns rate - bound; the decomposition check
/// returns |rate - sum of terms|.
double dissipation_excess(const SystemState& state, const GasModel& model,
                          const ControlPolicy& policy, double r);

struct ConservationAudit {
  double momentum_initial = 0.0;
  double momentum_final = 0.0;
  double drift = 0.0;             // |R(T) - R(0)|
  double input_impulse = 0.0;     // sum of u dt over the run
  double balance_residual = 0.0;  // |R(T) - R(0) - impulse|
  double max_length_residual = 0.0;  // |(b - a) - sum dm/rho| over samples
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  bool identity = true;  // rate-identity residuals at the refinement levels
  unsigned threads = 0;  // 0: hardware concurrency
};

struct RunResult {
  TrajectoryRecord record;
  AssumptionHReport assumption_h;
  double r = 0.0;
  ControlPolicy policy;
  MonotonicityAudit monotonicity;
  BarrierAudit barrier;
  DecayFit fit;
  DissipationAudit dissipation;
  ConservationAudit conservation;
  std::vector<IdentityResidual> identity;
  nlohmann::json report;
};

/// Builds the gas, checks the divergence conditions (AssumptionHFailed when
/// they fail), simulates, audits, and with an output directory writes
/// trajectory.csv, profiles/profile_<k>.csv and report.json.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

/// Rate-identity residuals of the scenario at one resolution.
IdentityResidual measure_identity(const Scenario& scenario, std::size_t cells);

struct SweepAxis {
  std::string path;  // dotted field path, e.g. "controller.R"
  std::vector<nlohmann::json> values;
};

/// Parses "controller.R=0.5,1,2". Values are JSON scalars; bare words are
/// taken as strings.
SweepAxis parse_axis(const std::string& text);

struct SweepRow {
  std::size_t cell = 0;
  std::vector<nlohmann::json> values;
  std::string status;
  std::string message;
  double sigma_hat = std::numeric_limits<double>::quiet_NaN();
  double M_hat = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  std::size_t violations = 0;
  double V0 = std::numeric_limits<double>::quiet_NaN();
  double V_end = std::numeric_limits<double>::quiet_NaN();
};

/// Runs the cartesian product of the axes (first axis slowest) in parallel.
/// Every cell yields a row; failures are recorded as the row status
/// ("invalid-config", "assumption-H-check-failed", "diverged@<t>", "error").
/// With an output directory each cell writes into cell_<k>/.
std::vector<SweepRow> sweep(const nlohmann::json& scenario_template, const std::vector<SweepAxis>& axes,
                            const std::optional<std::filesystem::path>& out_dir, unsigned threads = 0);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepAxis>& axes,
                     const std::vector<SweepRow>& rows);

/// Gas certification: rho*, divergence evidence, K estimate and the
/// power-law sufficient condition. "accepted" is false when the model is
/// rejected at construction.
struct GasCheck {
  bool accepted = false;
  bool passed = false;
  nlohmann::json report;
};
GasCheck check_gas(const nlohmann::json& gas_block);

}  // namespace piston

#endif  // PISTON_HARNESS_HPP_
