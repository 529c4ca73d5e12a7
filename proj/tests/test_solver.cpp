#include <doctest.h>

#include <cmath>
#include <random>

#include "piston/lyapunov.hpp"
#include "piston/solver.hpp"

using namespace piston;

namespace {

const GasModel& gas() {
  static const GasModel g = GasModel::ideal(1.0, 1.5, 1.0, 1.0);
  return g;
}

SystemState uniform(double rho, std::size_t n, double v = 0.0) {
  SystemState s;
  s.rho.assign(n, rho);
  s.v.assign(n + 1, v);
  return s;
}

SystemState perturbed(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = 0.3 * u(rng), b = 0.3 * u(rng), c = 0.3 * u(rng), d = 0.3 * u(rng);
  SystemState s = uniform(1.0, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double m = (j + 0.5) / n;
    s.rho[j] = 1.0 + a * std::cos(M_PI * m) + b * std::sin(2.0 * M_PI * m);
  }
  for (std::size_t i = 0; i <= n; ++i) {
    const double m = static_cast<double>(i) / n;
    s.v[i] = c * std::sin(M_PI * m) + d;
  }
  return s;
}

}  // namespace

TEST_CASE("right-hand side") {
  SUBCASE("equilibrium is at rest") {
    const auto r = semidiscrete_rhs(uniform(1.0, 20), gas(), 0.0);
    CHECK(r.da == 0.0);
    for (double x : r.drho) CHECK(x == 0.0);
    for (double x : r.dv) CHECK(x == 0.0);
  }
  SUBCASE("input acts on the left piston only") {
    const auto r = semidiscrete_rhs(uniform(1.0, 20), gas(), 0.7);
    CHECK(r.dv.front() == doctest::Approx(0.7).epsilon(1e-15));
    for (std::size_t i = 1; i < r.dv.size(); ++i) CHECK(r.dv[i] == 0.0);
    for (double x : r.drho) CHECK(x == 0.0);
  }
  SUBCASE("uniform compression") {
    // v = -x-like profile with v_m = -1: d rho / dt = rho^2.
    const std::size_t n = 16;
    SystemState s = uniform(1.2, n);
    for (std::size_t i = 0; i <= n; ++i) s.v[i] = 1.0 - static_cast<double>(i) / n;
    const auto r = semidiscrete_rhs(s, gas(), 0.0);
    CHECK(r.da == 1.0);
    for (double x : r.drho) CHECK(x == doctest::Approx(1.44).epsilon(1e-12));
  }
  SUBCASE("viscous part is odd in v, pressure part even") {
    // With mu = 0 the system is reversible: drho flips with v and dv does
    // not. Here the viscous stress is linear in v, so the even part of dv
    // is the pressure-only acceleration.
    std::mt19937_64 rng(3);
    SystemState s = perturbed(rng, 24);
    SystemState m = s;
    for (double& x : m.v) x = -x;
    SystemState z = s;
    for (double& x : z.v) x = 0.0;
    const auto f = semidiscrete_rhs(s, gas(), 0.0);
    const auto b = semidiscrete_rhs(m, gas(), 0.0);
    const auto p = semidiscrete_rhs(z, gas(), 0.0);
    CHECK(b.da == -f.da);
    for (std::size_t j = 0; j < f.drho.size(); ++j) CHECK(b.drho[j] == doctest::Approx(-f.drho[j]).epsilon(1e-14));
    for (std::size_t i = 0; i < f.dv.size(); ++i) {
      CHECK(0.5 * (f.dv[i] + b.dv[i]) == doctest::Approx(p.dv[i]).epsilon(1e-12).scale(1.0));
    }
  }
  SUBCASE("rejects non-finite input") {
    SystemState s = uniform(1.0, 8);
    s.v[3] = std::nan("");
    CHECK_THROWS_AS(semidiscrete_rhs(s, gas(), 0.0), DivergedState);
  }
}

TEST_CASE("stable time step") {
  SolverConfig cfg;
  cfg.N = 100;
  cfg.cfl_acoustic = 0.5;
  cfg.cfl_viscous = 0.5;
  cfg.dt_max = 1.0;
  CHECK(stable_dt(uniform(1.0, 100), gas(), cfg) == doctest::Approx(2.5e-5).epsilon(1e-14));
  const double dt200 = stable_dt(uniform(1.0, 200), gas(), cfg);
  CHECK(dt200 == doctest::Approx(2.5e-5 / 4.0).epsilon(1e-14));

  cfg.dt_max = 1e-6;
  CHECK(stable_dt(uniform(1.0, 100), gas(), cfg) == 1e-6);

  cfg.N = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.N = 10;
  cfg.cfl_viscous = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("stepping") {
  SolverConfig cfg;
  cfg.N = 32;
  SUBCASE("equilibrium is a fixed point for every policy") {
    const GasModel& g = gas();
    for (const ControlPolicy& p : {ControlPolicy{OpenLoop{}}, ControlPolicy{FullFeedback{2.0, 1.0}},
                                   ControlPolicy{Friction{1.0, 3.0, 4.0}}}) {
      SystemState s = uniform(1.0, 32);
      for (int k = 0; k < 50; ++k) step(s, g, p, cfg);
      for (double x : s.rho) CHECK(x == 1.0);
      for (double x : s.v) CHECK(x == 0.0);
      CHECK(s.a == 0.0);
    }
  }
  SUBCASE("open-loop momentum is conserved step by step") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
      SystemState s = perturbed(rng, 40);
      const double before = total_momentum(s);
      const auto d = step(s, gas(), OpenLoop{}, cfg);
      CHECK(std::abs(total_momentum(s) - before) <= 1e-14);
      CHECK(d.momentum == total_momentum(s));
    }
  }
  SUBCASE("closed-loop momentum changes by the input impulse") {
    std::mt19937_64 rng(12);
    SystemState s = perturbed(rng, 40);
    const FullFeedback law{1.0, 1.0};
    const double before = total_momentum(s);
    const auto d = step(s, gas(), law, cfg);
    CHECK(total_momentum(s) - before == doctest::Approx(d.u * d.dt).epsilon(1e-10));
  }
  SUBCASE("energy is not created in open loop") {
    std::mt19937_64 rng(13);
    SystemState s = perturbed(rng, 40);
    double prev = mechanical_energy(s, gas());
    for (int k = 0; k < 200; ++k) {
      step(s, gas(), OpenLoop{}, cfg);
      const double e = mechanical_energy(s, gas());
      CHECK(e <= prev + 1e-12);
      prev = e;
    }
  }
  SUBCASE("blow-up is reported and the state kept") {
    SystemState s = uniform(1.0, 16, 0.0);
    s.v.front() = 50.0;
    const SystemState copy = s;
    Stepper stepper(16);
    CHECK_THROWS_AS(stepper.advance(s, gas(), OpenLoop{}, 1.0), Error);
    CHECK(s.v == copy.v);
    CHECK(s.rho == copy.rho);
  }
}

TEST_CASE("simulate") {
  SolverConfig cfg;
  cfg.N = 32;
  cfg.t_end = 0.5;
  cfg.output_every = 0.1;
  InitialCondition ic;
  ic.eps_rho = 0.2;
  const SystemState s0 = make_initial_state(ic, gas(), cfg.N);

  SUBCASE("samples land on the output grid") {
    const auto rec = simulate(s0, gas(), FullFeedback{}, cfg);
    CHECK(rec.status == RunStatus::Completed);
    REQUIRE(rec.samples.size() == 6);
    for (std::size_t k = 0; k < rec.samples.size(); ++k) {
      CHECK(rec.samples[k].t == doctest::Approx(0.1 * k).epsilon(1e-12));
    }
    CHECK(rec.final_state.t == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rec.status_text() == "completed");
    CHECK(rec.r == 1.0);
  }
  SUBCASE("V decreases under full feedback") {
    const auto rec = simulate(s0, gas(), FullFeedback{}, cfg);
    for (std::size_t k = 1; k < rec.samples.size(); ++k) {
      CHECK(rec.samples[k].V < rec.samples[k - 1].V);
      CHECK(rec.samples[k].dV_dt <= 0.0);
    }
  }
  SUBCASE("runs are deterministic") {
    const auto r1 = simulate(s0, gas(), FullFeedback{}, cfg);
    const auto r2 = simulate(s0, gas(), FullFeedback{}, cfg);
    CHECK(r1.final_state.v == r2.final_state.v);
    CHECK(r1.final_state.rho == r2.final_state.rho);
  }
  SUBCASE("observers see every step and sample") {
    std::size_t steps = 0;
    std::size_t samples = 0;
    SimulateOptions opt;
    opt.on_step = [&](const SystemState&, const StepDiagnostics& d) {
      ++steps;
      CHECK(d.dt > 0.0);
    };
    opt.on_sample = [&](const SystemState&, const TrajectorySample&) { ++samples; };
    const auto rec = simulate(s0, gas(), OpenLoop{}, cfg, opt);
    CHECK(steps == rec.steps);
    CHECK(samples == rec.samples.size());
  }
}
