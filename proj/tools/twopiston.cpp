// Command-line front end: simulate, sweep, check-gas, fit-rate.
//
// Exit codes: 0 success, 2 invalid input or failed gas certification,
// 3 simulation divergence, 1 anything unexpected.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "piston/csv_io.hpp"
#include "piston/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kInvalid = 2;
constexpr int kDiverged = 3;

int cmd_simulate(const fs::path& config, const fs::path& out, bool identity, unsigned threads) {
  const piston::Scenario sc = piston::load_scenario(config);
  piston::RunOptions opts;
  opts.out_dir = out;
  opts.identity = identity;
  opts.threads = threads;
  const piston::RunResult res = piston::run(sc, opts);
  const auto& s = res.record.samples;
  std::printf("status=%s steps=%zu V0=%.6g V_end=%.6g violations=%zu sigma_hat=%s\n",
              res.record.status_text().c_str(), res.record.steps, s.front().V, s.back().V,
              res.monotonicity.violations,
              res.fit.degenerate ? "degenerate" : std::to_string(res.fit.sigma_hat).c_str());
  std::printf("wrote %s\n", out.string().c_str());
  if (res.record.status == piston::RunStatus::Diverged) {
    std::fprintf(stderr, "diverged: %s\n", res.record.message.c_str());
    return kDiverged;
  }
  return kOk;
}

int cmd_sweep(const fs::path& config, const std::vector<std::string>& axis_specs, const fs::path& out,
              unsigned threads) {
  const json tmpl = piston::load_json(config);
  // Fail early on a template that cannot parse at all.
  (void)piston::parse_scenario(tmpl);
  std::vector<piston::SweepAxis> axes;
  for (const auto& a : axis_specs) axes.push_back(piston::parse_axis(a));
  const auto rows = piston::sweep(tmpl, axes, out, threads);
  piston::write_sweep_csv(out / "summary.csv", axes, rows);
  std::size_t completed = 0;
  for (const auto& r : rows) completed += r.status == "completed";
  std::printf("cells=%zu completed=%zu summary=%s\n", rows.size(), completed,
              (out / "summary.csv").string().c_str());
  return kOk;
}

int cmd_check_gas(const fs::path& config) {
  const json doc = piston::load_json(config);
  const json& block = doc.contains("gas") ? doc.at("gas") : doc;
  const piston::GasCheck check = piston::check_gas(block);
  std::cout << check.report.dump(2) << '\n';
  return check.passed ? kOk : kInvalid;
}

int cmd_fit_rate(const fs::path& series, double window) {
  const piston::CsvTable table = piston::read_csv(series);
  const auto tc = table.column("t");
  const auto vc = table.column("V");
  if (!tc || !vc) throw piston::ConfigError(series.string(), "columns 't' and 'V' are required");
  const auto t = table.values(*tc);
  const auto V = table.values(*vc);
  std::vector<double> x;
  if (const auto xc = table.column("x_norm")) x = table.values(*xc);
  const piston::DecayFit fit = piston::fit_decay(t, V, window, x);
  json j = {{"degenerate", fit.degenerate},
            {"note", fit.note},
            {"sigma_hat", fit.degenerate ? json(nullptr) : json(fit.sigma_hat)},
            {"r_squared", fit.degenerate ? json(nullptr) : json(fit.r_squared)},
            {"M_hat", std::isfinite(fit.M_hat) ? json(fit.M_hat) : json(nullptr)},
            {"window", {fit.t_lo, fit.t_hi}},
            {"samples", fit.samples}};
  std::cout << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-piston gas simulation, boundary feedback and Lyapunov diagnostics"};
  app.require_subcommand(1);

  fs::path sim_config;
  fs::path sim_out;
  bool no_identity = false;
  unsigned threads = 0;
  auto* sim = app.add_subcommand("simulate", "Run one scenario and write trajectory, profiles and report");
  sim->add_option("--config", sim_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_flag("--no-identity", no_identity, "Skip the rate-identity refinement runs");
  sim->add_option("--threads", threads, "Worker threads (0: all cores)");

  fs::path sw_config;
  fs::path sw_out;
  std::vector<std::string> axes;
  auto* sw = app.add_subcommand("sweep", "Run a parameter grid");
  sw->add_option("--config", sw_config, "Scenario JSON template")->required()->check(CLI::ExistingFile);
  sw->add_option("--axis", axes, "Axis as dotted.path=v1,v2,... (repeatable)")->required();
  sw->add_option("--out", sw_out, "Output directory")->required();
  sw->add_option("--threads", threads, "Worker threads (0: all cores)");

  fs::path gas_config;
  auto* cg = app.add_subcommand("check-gas", "Certify a gas block");
  cg->add_option("--config", gas_config, "Scenario or gas JSON")->required()->check(CLI::ExistingFile);

  fs::path series;
  double window = 0.5;
  auto* fr = app.add_subcommand("fit-rate", "Fit an exponential decay rate to a trajectory CSV");
  fr->add_option("--series", series, "CSV with columns t, V (and optionally x_norm)")
      ->required()
      ->check(CLI::ExistingFile);
  fr->add_option("--window", window, "Trailing window fraction")->check(CLI::Range(1e-9, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*sim) return cmd_simulate(sim_config, sim_out, no_identity, threads);
    if (*sw) return cmd_sweep(sw_config, axes, sw_out, threads);
    if (*cg) return cmd_check_gas(gas_config);
    if (*fr) return cmd_fit_rate(series, window);
  } catch (const piston::DivergedState& e) {
    std::fprintf(stderr, "diverged: %s\n", e.what());
    return kDiverged;
  } catch (const piston::DensityPositivityViolation& e) {
    std::fprintf(stderr, "diverged: %s\n", e.what());
    return kDiverged;
  } catch (const piston::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
  return kInternal;
}
