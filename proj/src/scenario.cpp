#include "piston/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace piston {

using nlohmann::json;

namespace {

std::string join(const std::string& ctx, const std::string& key) {
  return ctx.empty() ? key : ctx + "." + key;
}

void require_object(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx, "expected a JSON object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& ctx) {
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError(join(ctx, item.key()), "unknown field");
  }
}

double number(const json& j, const char* key, const std::string& ctx, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(join(ctx, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(ctx, key), "must be finite");
  return x;
}

std::optional<double> optional_number(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return number(j, key, ctx, 0.0);
}

std::size_t count(const json& v, const std::string& ctx) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError(ctx, "expected a non-negative integer");
  }
  const auto x = v.get<long long>();
  if (x < 0) throw ConfigError(ctx, "expected a non-negative integer");
  return static_cast<std::size_t>(x);
}

double positive(double x, const std::string& ctx) {
  if (!(x > 0.0)) throw ConfigError(ctx, "must be > 0");
  return x;
}

PowerLawBounds parse_bounds(const json& j, const std::string& ctx) {
  require_object(j, ctx);
  check_keys(j, {"c", "gamma", "A", "eta"}, ctx);
  PowerLawBounds b;
  b.c = number(j, "c", ctx, b.c);
  b.gamma = number(j, "gamma", ctx, b.gamma);
  b.A = number(j, "A", ctx, b.A);
  b.eta = number(j, "eta", ctx, b.eta);
  return b;
}

std::vector<GasSample> parse_samples(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() < 2) throw ConfigError(ctx, "expected an array of >= 2 samples");
  std::vector<GasSample> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string c = ctx + "[" + std::to_string(i) + "]";
    const json& row = j[i];
    GasSample s;
    if (row.is_array()) {
      if (row.size() != 3 || !row[0].is_number() || !row[1].is_number() || !row[2].is_number()) {
        throw ConfigError(c, "expected [rho, P, mu]");
      }
      s = {row[0].get<double>(), row[1].get<double>(), row[2].get<double>()};
    } else if (row.is_object()) {
      check_keys(row, {"rho", "P", "mu"}, c);
      if (!row.contains("rho") || !row.contains("P") || !row.contains("mu")) {
        throw ConfigError(c, "expected fields rho, P, mu");
      }
      s = {number(row, "rho", c, 0.0), number(row, "P", c, 0.0), number(row, "mu", c, 0.0)};
    } else {
      throw ConfigError(c, "expected [rho, P, mu] or {rho, P, mu}");
    }
    out.push_back(s);
  }
  return out;
}

InitialCondition parse_initial(const json& j, const std::string& ctx) {
  require_object(j, ctx);
  check_keys(j, {"eps_rho", "q_rho", "eps_v", "q_v", "v_off", "a0", "length"}, ctx);
  InitialCondition ic;
  ic.eps_rho = number(j, "eps_rho", ctx, ic.eps_rho);
  ic.q_rho = positive(number(j, "q_rho", ctx, ic.q_rho), join(ctx, "q_rho"));
  ic.eps_v = number(j, "eps_v", ctx, ic.eps_v);
  ic.q_v = positive(number(j, "q_v", ctx, ic.q_v), join(ctx, "q_v"));
  ic.v_off = number(j, "v_off", ctx, ic.v_off);
  ic.a0 = number(j, "a0", ctx, ic.a0);
  ic.length = optional_number(j, "length", ctx);
  if (ic.length) positive(*ic.length, join(ctx, "length"));
  if (ic.eps_rho <= -1.0) throw ConfigError(join(ctx, "eps_rho"), "must be > -1");
  return ic;
}

ControllerSpec parse_controller(const json& j, const std::string& ctx) {
  require_object(j, ctx);
  check_keys(j, {"type", "R", "r"}, ctx);
  ControllerSpec c;
  if (j.contains("type")) {
    if (!j.at("type").is_string()) throw ConfigError(join(ctx, "type"), "expected a string");
    c.type = j.at("type").get<std::string>();
  }
  if (c.type != "open" && c.type != "full" && c.type != "friction") {
    throw ConfigError(join(ctx, "type"), "expected \"open\", \"full\" or \"friction\"");
  }
  c.R = positive(number(j, "R", ctx, c.R), join(ctx, "R"));
  c.r = optional_number(j, "r", ctx);
  if (c.r) positive(*c.r, join(ctx, "r"));
  return c;
}

SolverConfig parse_solver(const json& j, const std::string& ctx) {
  require_object(j, ctx);
  check_keys(j, {"N", "cfl_acoustic", "cfl_viscous", "t_end", "output_every", "dt_max"}, ctx);
  SolverConfig s;
  if (j.contains("N")) s.N = count(j.at("N"), join(ctx, "N"));
  s.cfl_acoustic = number(j, "cfl_acoustic", ctx, s.cfl_acoustic);
  s.cfl_viscous = number(j, "cfl_viscous", ctx, s.cfl_viscous);
  s.t_end = number(j, "t_end", ctx, s.t_end);
  s.output_every = number(j, "output_every", ctx, s.output_every);
  s.dt_max = number(j, "dt_max", ctx, s.dt_max);
  s.validate();
  return s;
}

DiagnosticsConfig parse_diagnostics(const json& j, const std::string& ctx) {
  require_object(j, ctx);
  check_keys(j, {"fit_window_fraction", "refinement_levels", "profile_every", "monotonicity_tolerance"},
             ctx);
  DiagnosticsConfig d;
  d.fit_window_fraction = number(j, "fit_window_fraction", ctx, d.fit_window_fraction);
  if (!(d.fit_window_fraction > 0.0 && d.fit_window_fraction < 1.0)) {
    throw ConfigError(join(ctx, "fit_window_fraction"), "must be in (0, 1)");
  }
  if (j.contains("refinement_levels")) {
    const json& levels = j.at("refinement_levels");
    const std::string c = join(ctx, "refinement_levels");
    if (!levels.is_array()) throw ConfigError(c, "expected an array of cell counts");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const std::size_t n = count(levels[i], c + "[" + std::to_string(i) + "]");
      if (n < 4) throw ConfigError(c + "[" + std::to_string(i) + "]", "cell count must be >= 4");
      d.refinement_levels.push_back(n);
    }
  }
  d.profile_every = positive(number(j, "profile_every", ctx, d.profile_every), join(ctx, "profile_every"));
  d.monotonicity_tolerance = number(j, "monotonicity_tolerance", ctx, d.monotonicity_tolerance);
  if (!(d.monotonicity_tolerance >= 0.0)) {
    throw ConfigError(join(ctx, "monotonicity_tolerance"), "must be >= 0");
  }
  return d;
}

}  // namespace

GasSpec parse_gas(const json& j, const std::string& ctx) {
  require_object(j, ctx);
  std::string kind = "ideal";
  if (j.contains("kind")) {
    if (!j.at("kind").is_string()) throw ConfigError(join(ctx, "kind"), "expected a string");
    kind = j.at("kind").get<std::string>();
  }
  GasSpec spec;
  if (kind == "ideal") {
    check_keys(j, {"kind", "c", "gamma", "A", "P_ext"}, ctx);
    IdealGas g;
    g.c = number(j, "c", ctx, g.c);
    g.gamma = number(j, "gamma", ctx, g.gamma);
    g.A = number(j, "A", ctx, g.A);
    spec.law = g;
  } else if (kind == "tabulated") {
    check_keys(j, {"kind", "samples", "bounds", "P_ext"}, ctx);
    if (!j.contains("samples")) throw ConfigError(join(ctx, "samples"), "required for tabulated gas");
    GenericGas g;
    try {
      g = tabulated_gas(parse_samples(j.at("samples"), join(ctx, "samples")));
    } catch (const InvalidGasModel& e) {
      throw ConfigError(join(ctx, "samples"), e.what());
    }
    if (j.contains("bounds")) g.bounds = parse_bounds(j.at("bounds"), join(ctx, "bounds"));
    spec.law = std::move(g);
  } else {
    throw ConfigError(join(ctx, "kind"), "expected \"ideal\" or \"tabulated\"");
  }
  spec.p_ext = positive(number(j, "P_ext", ctx, spec.p_ext), join(ctx, "P_ext"));
  return spec;
}

Scenario parse_scenario(const json& doc) {
  require_object(doc, "");
  check_keys(doc, {"gas", "initial", "controller", "solver", "diagnostics"}, "");
  Scenario s;
  if (doc.contains("gas")) s.gas = parse_gas(doc.at("gas"), "gas");
  if (doc.contains("initial")) s.initial = parse_initial(doc.at("initial"), "initial");
  if (doc.contains("controller")) s.controller = parse_controller(doc.at("controller"), "controller");
  if (doc.contains("solver")) s.solver = parse_solver(doc.at("solver"), "solver");
  if (doc.contains("diagnostics")) {
    s.diagnostics = parse_diagnostics(doc.at("diagnostics"), "diagnostics");
  }
  return s;
}

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    // Drop the library's "[json.exception.parse_error.101] parse error at ..." prefix.
    if (const auto p = msg.find(": "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col), msg);
  }
}

json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string(), "cannot open for reading");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_json_text(buf.str(), path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  const json doc = load_json(path);
  try {
    return parse_scenario(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.context(),
                      std::string(e.what()).substr(e.context().empty() ? 0 : e.context().size() + 2));
  }
}

GasModel build_gas(const GasSpec& spec) { return GasModel(spec.law, spec.p_ext); }

ControlPolicy build_policy(const ControllerSpec& spec, const GasModel& model) {
  if (spec.type == "open") return OpenLoop{};
  if (spec.type == "full") return FullFeedback{spec.R, spec.r.value_or(1.0)};
  const KEstimate est = estimate_K(model);
  if (!est.bounded) throw AssumptionAFailed(est.summary);
  Friction f{spec.R, spec.r.value_or(0.5 * spec.R * est.k_hat), est.k_hat};
  validate(ControlPolicy{f});
  return f;
}

}  // namespace piston
