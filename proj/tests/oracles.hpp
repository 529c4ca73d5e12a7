// Independent reference computations for the tests. Nothing here calls the
// library's quadrature or root finders.
#ifndef PISTON_TESTS_ORACLES_HPP_
#define PISTON_TESTS_ORACLES_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

/// Composite Simpson with a fixed, even number of panels.
template <class F>
double simpson(F&& f, double lo, double hi, std::size_t panels = 1000000) {
  if (panels % 2) ++panels;
  const double h = (hi - lo) / static_cast<double>(panels);
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i < panels; ++i) {
    const double x = lo + h * static_cast<double>(i);
    (i % 2 ? odd : even) += f(x);
  }
  return h / 3.0 * (f(lo) + f(hi) + 4.0 * odd + 2.0 * even);
}

/// Plain bisection for increasing f on [lo, hi].
template <class F>
double bisect(F&& f, double target, double lo, double hi, int iterations = 200) {
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Ideal gas P = c rho^gamma, mu = A rho^((gamma-1)/2), written out by hand.
struct Ideal {
  double c = 1.0;
  double gamma = 1.5;
  double A = 1.0;
  double rho_star = 1.0;

  double P(double r) const { return c * std::pow(r, gamma); }
  double dP(double r) const { return c * gamma * std::pow(r, gamma - 1.0); }
  double mu(double r) const { return A * std::pow(r, 0.5 * (gamma - 1.0)); }
  double Q(double r) const {
    return c / (gamma - 1.0) *
           (std::pow(r, gamma) - gamma * std::pow(rho_star, gamma - 1.0) * r +
            (gamma - 1.0) * std::pow(rho_star, gamma));
  }
  double k(double r) const {
    const double h = 0.5 * (gamma - 1.0);
    return 2.0 * A / (gamma - 1.0) * (std::pow(r, h) - std::pow(rho_star, h));
  }
};

/// Monotone function tabulated on a uniform grid in s = ln(rho) by
/// cumulative trapezoid integration of g(rho) drho = g(e^s) e^s ds, zeroed
/// at rho_star. Roots are found by scanning for the bracketing cell and
/// interpolating linearly in s.
class LogGridPrimitive {
 public:
  template <class F>
  LogGridPrimitive(F&& g, double rho_lo, double rho_hi, double rho_star, std::size_t points)
      : s_lo_(std::log(rho_lo)), h_((std::log(rho_hi) - std::log(rho_lo)) / static_cast<double>(points - 1)) {
    values_.resize(points);
    double prev = g(rho_lo) * rho_lo;
    values_[0] = 0.0;
    for (std::size_t i = 1; i < points; ++i) {
      const double r = std::exp(s_lo_ + h_ * static_cast<double>(i));
      const double cur = g(r) * r;
      values_[i] = values_[i - 1] + 0.5 * h_ * (prev + cur);
      prev = cur;
    }
    offset_ = at(rho_star);
  }

  double operator()(double rho) const { return at(rho) - offset_; }

  /// Smallest rho on the grid with value >= target, refined linearly.
  double root(double target) const {
    const double t = target + offset_;
    std::size_t lo = 0;
    std::size_t hi = values_.size() - 1;
    if (t <= values_[lo] || t >= values_[hi]) return std::nan("");
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (values_[mid] < t ? lo : hi) = mid;
    }
    const double w = (t - values_[lo]) / (values_[hi] - values_[lo]);
    return std::exp(s_lo_ + h_ * (static_cast<double>(lo) + w));
  }

 private:
  double at(double rho) const {
    const double x = (std::log(rho) - s_lo_) / h_;
    auto i = static_cast<std::size_t>(std::floor(x));
    if (i + 1 >= values_.size()) i = values_.size() - 2;
    const double w = x - static_cast<double>(i);
    return values_[i] + w * (values_[i + 1] - values_[i]);
  }

  double s_lo_;
  double h_;
  double offset_ = 0.0;
  std::vector<double> values_;
};

}  // namespace oracle

#endif  // PISTON_TESTS_ORACLES_HPP_
