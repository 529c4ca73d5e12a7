#ifndef PISTON_QUADRATURE_HPP_
#define PISTON_QUADRATURE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "piston/errors.hpp"

namespace piston {

struct QuadratureConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 200000;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1) {
      throw DomainError("quadrature tolerances must be > 0 and max_subdivisions >= 1");
    }
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
  bool converged = true;
};

// Adaptive Simpson with interval bisection and Richardson correction.
// The interval is first split into `initial_panels` pieces so that the
// relative tolerance is anchored to a reasonable estimate of the total.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double lo, double hi,
                                  const QuadratureConfig& cfg = {},
                                  int initial_panels = 8) {
  QuadratureResult out;
  if (lo == hi) return out;
  const double sign = hi > lo ? 1.0 : -1.0;
  if (sign < 0) std::swap(lo, hi);

  struct Panel {
    double lo, hi, f_lo, f_mid, f_hi, whole;
  };
  std::vector<Panel> panels;
  panels.reserve(initial_panels);
  const double width = (hi - lo) / initial_panels;
  double f_left = f(lo);
  double coarse = 0.0;
  for (int i = 0; i < initial_panels; ++i) {
    const double a = lo + i * width;
    const double b = (i + 1 == initial_panels) ? hi : lo + (i + 1) * width;
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    const double s = (b - a) / 6.0 * (f_left + 4.0 * fm + fb);
    panels.push_back({a, b, f_left, fm, fb, s});
    coarse += s;
    f_left = fb;
  }

  const double total_tol = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(coarse));
  constexpr int kMaxDepth = 60;

  struct Frame {
    double lo, hi, f_lo, f_mid, f_hi, whole, tol;
    int depth;
  };
  std::vector<Frame> stack;
  for (const auto& p : panels) {
    stack.push_back({p.lo, p.hi, p.f_lo, p.f_mid, p.f_hi, p.whole,
                     total_tol / initial_panels, 0});
  }

  double sum = 0.0;
  double err = 0.0;
  while (!stack.empty()) {
    Frame fr = stack.back();
    stack.pop_back();
    const double m = 0.5 * (fr.lo + fr.hi);
    const double lm = 0.5 * (fr.lo + m);
    const double rm = 0.5 * (m + fr.hi);
    const double f_lm = f(lm);
    const double f_rm = f(rm);
    const double left = (m - fr.lo) / 6.0 * (fr.f_lo + 4.0 * f_lm + fr.f_mid);
    const double right = (fr.hi - m) / 6.0 * (fr.f_mid + 4.0 * f_rm + fr.f_hi);
    const double delta = left + right - fr.whole;
    const bool tiny = !(m > fr.lo && m < fr.hi);
    if (std::abs(delta) <= 15.0 * fr.tol || fr.depth >= kMaxDepth || tiny ||
        out.subdivisions >= cfg.max_subdivisions) {
      if (std::abs(delta) > 15.0 * fr.tol) out.converged = false;
      sum += left + right + delta / 15.0;
      err += std::abs(delta) / 15.0;
      continue;
    }
    ++out.subdivisions;
    stack.push_back({fr.lo, m, fr.f_lo, f_lm, fr.f_mid, left, 0.5 * fr.tol, fr.depth + 1});
    stack.push_back({m, fr.hi, fr.f_mid, f_rm, fr.f_hi, right, 0.5 * fr.tol, fr.depth + 1});
  }
  if (!std::isfinite(sum)) out.converged = false;
  out.value = sign * sum;
  out.error_estimate = err;
  return out;
}

// Integrates f over [lo, hi] (both > 0) in the variable s = ln(x), which
// spreads panels evenly over decades and tames x^-p behaviour near 0.
template <class F>
QuadratureResult adaptive_simpson_log(F&& f, double lo, double hi,
                                      const QuadratureConfig& cfg = {}) {
  if (!(lo > 0.0) || !(hi > 0.0)) {
    throw DomainError("log-variable quadrature needs positive limits");
  }
  return adaptive_simpson(
      [&f](double s) {
        const double x = std::exp(s);
        return f(x) * x;
      },
      std::log(lo), std::log(hi), cfg);
}

// Throws NumericalError carrying the achieved tolerance if the result did
// not converge.
inline double require_converged(const QuadratureResult& r, const char* what) {
  if (!r.converged) {
    throw NumericalError(std::string(what) + ": quadrature did not converge (achieved error " +
                             std::to_string(r.error_estimate) + ")",
                         r.error_estimate);
  }
  return r.value;
}

}  // namespace piston

#endif  // PISTON_QUADRATURE_HPP_
