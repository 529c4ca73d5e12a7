#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "piston/errors.hpp"
#include "piston/gas_model.hpp"

using namespace piston;

namespace {

GasModel reference_gas() { return GasModel::ideal(1.0, 1.5, 1.0, 1.0); }

// Generic law evaluating the same ideal formulas pointwise.
GasModel generic_mirror(double c, double gamma, double A, double p_ext) {
  GenericGas g;
  g.pressure = [=](double r) { return c * std::pow(r, gamma); };
  g.pressure_derivative = [=](double r) { return c * gamma * std::pow(r, gamma - 1.0); };
  g.viscosity = [=](double r) { return A * std::pow(r, 0.5 * (gamma - 1.0)); };
  return GasModel(g, p_ext);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("adaptive Simpson integrates smooth and endpoint-steep integrands") {
  const auto r = adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(rel(r.value, std::exp(1.0) - 1.0) < 1e-12);
  const auto s = adaptive_simpson_log([](double x) { return 1.0 / std::sqrt(x); }, 1e-8, 1.0);
  CHECK(rel(s.value, 2.0 - 2e-4) < 1e-10);
  // Reversed limits flip the sign.
  const auto back = adaptive_simpson([](double x) { return x * x; }, 1.0, 0.0);
  CHECK(back.value == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("non-convergent quadrature reports its achieved tolerance") {
  QuadratureConfig cfg;
  cfg.max_subdivisions = 2;
  const auto r = adaptive_simpson([](double x) { return std::sin(1.0 / x); }, 1e-3, 1.0, cfg);
  CHECK_FALSE(r.converged);
  try {
    require_converged(r, "test");
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.achieved_tolerance() > 0.0);
  }
}

TEST_CASE("equilibrium density") {
  CHECK(reference_gas().rho_star() == 1.0);

  const GasModel g = GasModel::ideal(4.0, 1.5, 1.0, 32.0);
  const double oracle = oracle::bisect([](double r) { return 4.0 * std::pow(r, 1.5); }, 32.0, 1e-6, 1e6);
  CHECK(rel(g.rho_star(), oracle) < 1e-12);
  CHECK(g.rho_star() == doctest::Approx(4.0).epsilon(1e-14));

  const GasModel mirror = generic_mirror(4.0, 1.5, 1.0, 32.0);
  CHECK(rel(mirror.rho_star(), g.rho_star()) < 1e-10);
  CHECK(std::abs(mirror.pressure(mirror.rho_star()) - 32.0) <= 1e-12 * 32.0);
}

TEST_CASE("gas model validation") {
  CHECK_THROWS_AS(GasModel::ideal(1.0, 2.5, 1.0, 1.0), InvalidGasModel);
  CHECK_THROWS_AS(GasModel::ideal(1.0, 1.0, 1.0, 1.0), InvalidGasModel);
  CHECK_THROWS_AS(GasModel::ideal(-1.0, 1.5, 1.0, 1.0), InvalidGasModel);
  CHECK_THROWS_AS(GasModel::ideal(1.0, 1.5, 0.0, 1.0), InvalidGasModel);
  CHECK_THROWS_AS(GasModel::ideal(1.0, 1.5, 1.0, 0.0), InvalidGasModel);

  GenericGas decreasing;
  decreasing.pressure = [](double r) { return 1.0 / r; };
  decreasing.pressure_derivative = [](double r) { return -1.0 / (r * r); };
  decreasing.viscosity = [](double) { return 1.0; };
  CHECK_THROWS_AS(GasModel(decreasing, 1.0), InvalidGasModel);

  CHECK_THROWS_AS(tabulated_gas({{1.0, 1.0, 1.0}, {2.0, 0.5, 1.0}}), InvalidGasModel);
  CHECK_THROWS_AS(tabulated_gas({{1.0, 1.0, 1.0}}), InvalidGasModel);

  const GasModel g = reference_gas();
  CHECK_THROWS_AS(g.potential_energy_density(0.0), DomainError);
  CHECK_THROWS_AS(g.viscous_potential(-1.0), DomainError);
  CHECK_THROWS_AS(g.barrier_function(0.0), DomainError);
}

TEST_CASE("potential energy density Q") {
  const GasModel g = reference_gas();
  CHECK(g.potential_energy_density(1.0) == 0.0);
  CHECK(g.potential_energy_density(4.0) == doctest::Approx(5.0).epsilon(1e-13));

  // Definition: rho int_{rho*}^{rho} P/t^2 dt - P(rho*) rho / rho* + P(rho*).
  const double integral = oracle::simpson([](double t) { return std::pow(t, 1.5) / (t * t); }, 1.0, 4.0);
  const double q_oracle = 4.0 * integral - 4.0 + 1.0;
  CHECK(rel(g.potential_energy_density(4.0), q_oracle) < 1e-8);

  const GasModel mirror = generic_mirror(1.0, 1.5, 1.0, 1.0);
  CHECK(rel(mirror.potential_energy_density(4.0), 5.0) < 1e-8);
}

TEST_CASE("viscous potential k") {
  const GasModel g = reference_gas();
  CHECK(g.viscous_potential(1.0) == 0.0);
  CHECK(g.viscous_potential(16.0) == doctest::Approx(4.0).epsilon(1e-13));
  const double k_oracle = oracle::simpson([](double t) { return std::pow(t, 0.25) / t; }, 1.0, 16.0);
  CHECK(rel(g.viscous_potential(16.0), k_oracle) < 1e-8);
  CHECK(g.viscous_potential(0.5) < 0.0);
  CHECK(g.viscous_potential(2.0) > 0.0);

  const GasModel mirror = generic_mirror(1.0, 1.5, 1.0, 1.0);
  CHECK(rel(mirror.viscous_potential(16.0), 4.0) < 1e-8);
}

TEST_CASE("barrier function G") {
  const GasModel g = reference_gas();
  const oracle::Ideal ref;
  CHECK(g.barrier_function(1.0) == 0.0);
  CHECK(g.barrier_function(2.0) > 0.0);
  CHECK(g.barrier_function(0.5) < 0.0);
  const double G_oracle = oracle::simpson(
      [&](double l) { return ref.mu(l) * std::pow(l, -1.5) * std::sqrt(ref.Q(l)); }, 1.0, 2.0);
  CHECK(rel(g.barrier_function(2.0), G_oracle) < 1e-6);
}

TEST_CASE("tabulated gas mirrors the ideal closed forms") {
  std::vector<GasSample> rows;
  for (int j = -8; j <= 8; ++j) {
    const double r = std::pow(10.0, j * 0.5);
    rows.push_back({r, std::pow(r, 1.5), std::pow(r, 0.25)});
  }
  const GasModel tab(tabulated_gas(rows), 1.0);
  const GasModel ideal = reference_gas();
  CHECK(rel(tab.rho_star(), 1.0) < 1e-10);
  for (double r : {0.2, 0.7, 1.3, 4.0, 9.0}) {
    CHECK(rel(tab.potential_energy_density(r), ideal.potential_energy_density(r)) < 1e-8);
    CHECK(rel(tab.viscous_potential(r), ideal.viscous_potential(r)) < 1e-8);
  }
}

TEST_CASE("closed forms agree with quadrature of the definitions on [rho*/10, 10 rho*]") {
  const GasModel ideal = GasModel::ideal(2.0, 1.4, 0.7, 3.0);
  const GasModel mirror = generic_mirror(2.0, 1.4, 0.7, 3.0);
  const double rs = ideal.rho_star();
  double worst_q = 0.0;
  double worst_k = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double r = rs * std::pow(10.0, -1.0 + 2.0 * i / 99.0);
    const double q = ideal.potential_energy_density(r);
    const double qm = mirror.potential_energy_density(r);
    if (q > 0.0) worst_q = std::max(worst_q, rel(qm, q));
    const double k = ideal.viscous_potential(r);
    if (k != 0.0) worst_k = std::max(worst_k, rel(mirror.viscous_potential(r), k));
  }
  CHECK(worst_q <= 1e-8);
  CHECK(worst_k <= 1e-8);
}

TEST_CASE("monotonicity, positivity and convexity properties") {
  const GasModel g = reference_gas();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logr(std::log(1e-3), std::log(1e3));
  for (int i = 0; i < 200; ++i) {
    double r1 = std::exp(logr(rng));
    double r2 = std::exp(logr(rng));
    if (r1 > r2) std::swap(r1, r2);
    if (r2 / r1 - 1.0 < 1e-9) continue;
    CHECK(g.viscous_potential(r1) < g.viscous_potential(r2));
    CHECK(g.barrier_function(r1) < g.barrier_function(r2));
  }
  for (int i = -300; i <= 300; ++i) {
    const double r = std::pow(10.0, i / 100.0);
    const double q = g.potential_energy_density(r);
    CHECK(q >= 0.0);
    if (r != 1.0) CHECK(q > 0.0);
    CHECK(g.viscous_potential(r) * (g.pressure(r) - g.p_ext()) >= 0.0);
  }
  // Second differences of Q on a uniform grid are non-negative.
  const double h = 1e-2;
  for (double r = 0.05; r < 5.0; r += 0.01) {
    const double d2 = g.potential_energy_density(r + h) - 2.0 * g.potential_energy_density(r) +
                      g.potential_energy_density(r - h);
    CHECK(d2 >= -1e-14);
  }
}

TEST_CASE("divergence conditions: ideal gas is consistent") {
  const auto rep = check_assumption_H(reference_gas());
  CHECK(rep.consistent);
  CHECK(rep.barrier_upper.diverges);
  CHECK(rep.barrier_lower.diverges);
  CHECK(rep.potential_upper.diverges);
  CHECK(rep.power_law == PowerLawStatus::Satisfied);
  CHECK(rep.summary.find("consistent") != std::string::npos);
}

TEST_CASE("divergence conditions: gamma = 1 law with G bounded below is flagged") {
  // P = rho, mu = rho: Q = rho ln rho - rho + 1 ~ 1 near 0, so the
  // integrand of G behaves like l^{-1/2} and G(0+) is finite.
  GenericGas g;
  g.pressure = [](double r) { return r; };
  g.pressure_derivative = [](double) { return 1.0; };
  g.viscosity = [](double r) { return r; };
  const auto rep = check_assumption_H(GasModel(g, 1.0));
  CHECK_FALSE(rep.consistent);
  CHECK_FALSE(rep.barrier_lower.diverges);
  CHECK(rep.summary.find("violation evidence") != std::string::npos);
  CHECK(rep.power_law == PowerLawStatus::NotDeclared);
}

TEST_CASE("power-law sufficient condition") {
  CHECK(check_assumption_H(GasModel::ideal(1.0, 1.9, 1.0, 1.0)).power_law == PowerLawStatus::Satisfied);

  GenericGas g;
  g.pressure = [](double r) { return std::pow(r, 1.5) + r * r * 0.01; };
  g.pressure_derivative = [](double r) { return 1.5 * std::sqrt(r) + 0.02 * r; };
  g.viscosity = [](double r) { return std::pow(r, 0.3) + 0.1; };
  g.bounds = PowerLawBounds{1.0, 1.5, 1.0, 0.3};
  CHECK(check_assumption_H(GasModel(g, 1.0)).power_law == PowerLawStatus::Satisfied);
  g.bounds = PowerLawBounds{1.0, 1.5, 1.0, 0.7};
  CHECK(check_assumption_H(GasModel(g, 1.0)).power_law == PowerLawStatus::NotSatisfied);
}

TEST_CASE("K estimate") {
  const GasModel g = reference_gas();
  const KEstimate est = estimate_K(g);
  REQUIRE(est.bounded);
  // k'(1)/P'(1) = mu(1) / (1 * c gamma) = 1/1.5.
  CHECK(est.limit_at_rho_star == doctest::Approx(1.0 / 1.5).epsilon(1e-14));
  CHECK(est.k_hat >= est.limit_at_rho_star);
  // 2A / ((gamma-1) c) rho*^{-(gamma+1)/2} = 4.
  REQUIRE(est.analytic_lower_bound.has_value());
  CHECK(*est.analytic_lower_bound == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(est.satisfies_analytic_bound);
  CHECK(est.k_hat == doctest::Approx(1.25 * est.raw_sup));

  const double only[] = {1.0};
  const KEstimate degenerate = estimate_K(g, only, 1.0);
  CHECK(degenerate.k_hat == doctest::Approx(1.0 / 1.5).epsilon(1e-14));
}

TEST_CASE("K estimate reports an unbounded ratio") {
  // mu = 1 and P = rho^1.5: |k| = |ln rho| grows while |P - 1| -> 1 at 0.
  GenericGas g;
  g.pressure = [](double r) { return std::pow(r, 1.5); };
  g.pressure_derivative = [](double r) { return 1.5 * std::sqrt(r); };
  g.viscosity = [](double) { return 1.0; };
  const KEstimate est = estimate_K(GasModel(g, 1.0));
  CHECK_FALSE(est.bounded);
}

TEST_CASE("divergence evidence rule") {
  CHECK(shows_divergence(1.0, 2.0, 3.0));
  CHECK(shows_divergence(1.0, 2.0, 4.0));
  CHECK_FALSE(shows_divergence(1.0, 2.0, 2.5));
  CHECK_FALSE(shows_divergence(1.0, 1.0, 1.0));
}
