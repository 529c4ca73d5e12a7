#ifndef PISTON_SCENARIO_HPP_
#define PISTON_SCENARIO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "piston/control.hpp"
#include "piston/gas_model.hpp"
#include "piston/solver.hpp"
#include "piston/state.hpp"

namespace piston {

/// Gas block: {"kind": "ideal", c, gamma, A, P_ext} or
/// {"kind": "tabulated", P_ext, samples: [[rho, P, mu], ...], bounds?}.
struct GasSpec {
  GasLaw law = IdealGas{};
  double p_ext = 1.0;
};

/// Controller block: {"type": "open"|"full"|"friction", R, r}. For friction
/// a missing r means the certified weight R K_hat / 2; for open loop r is
/// only the weight of the reported V.
struct ControllerSpec {
  std::string type = "full";
  double R = 1.0;
  std::optional<double> r;
};

struct DiagnosticsConfig {
  double fit_window_fraction = 0.5;
  /// Cell counts for the rate-identity residuals. Empty means N/2, N, 2N.
  std::vector<std::size_t> refinement_levels;
  /// Spacing of profile snapshots; t = 0 and t_end are always written.
  double profile_every = 1.0;
  /// V increases per sample up to this fraction of V(0) are tolerated.
  double monotonicity_tolerance = 1e-6;
};

struct Scenario {
  GasSpec gas;
  InitialCondition initial;
  ControllerSpec controller;
  SolverConfig solver;
  DiagnosticsConfig diagnostics;
};

/// Parses and validates a scenario document. Throws ConfigError whose
/// context names the offending field (e.g. "controller.R").
Scenario parse_scenario(const nlohmann::json& doc);

/// Reads JSON text; syntax errors carry "<source>:<line>:<column>".
nlohmann::json parse_json_text(const std::string& text, const std::string& source);
nlohmann::json load_json(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

GasSpec parse_gas(const nlohmann::json& block, const std::string& context = "gas");

/// Throws InvalidGasModel from the model constructor.
GasModel build_gas(const GasSpec& spec);

/// Throws DomainError / AssumptionAFailed for invalid gains.
ControlPolicy build_policy(const ControllerSpec& spec, const GasModel& model);

}  // namespace piston

#endif  // PISTON_SCENARIO_HPP_
