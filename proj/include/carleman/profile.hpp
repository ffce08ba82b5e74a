#pragma once
// Weight profiles v(xi), the change of variables x(xi) = int_0^xi v^{-2/n},
// its inverse, and the constants of the large-xi asymptotics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "carleman/errors.hpp"
#include "carleman/series.hpp"

namespace carleman {

enum class ProfileFamily { cosh, power_law, stretched_exp };

inline std::string to_string(ProfileFamily f) {
  switch (f) {
    case ProfileFamily::cosh: return "cosh";
    case ProfileFamily::power_law: return "power_law";
    case ProfileFamily::stretched_exp: return "stretched_exp";
  }
  return "unknown";
}

// Even, positive weights decaying at infinity:
//   cosh            v = sqrt(pi) / sqrt(cosh(pi xi))
//   power_law       v = (1 + xi^2)^(-alpha/2)
//   stretched_exp   v = exp(-beta ((1 + xi^2)^(alpha/2) - 1))
class WeightProfile {
 public:
  static WeightProfile hankel() { return WeightProfile(ProfileFamily::cosh, 0.0, 0.0); }
  static WeightProfile power_law(double alpha) { return WeightProfile(ProfileFamily::power_law, alpha, 0.0); }
  static WeightProfile stretched_exp(double alpha, double beta) {
    return WeightProfile(ProfileFamily::stretched_exp, alpha, beta);
  }

  ProfileFamily family() const { return family_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  // Largest |xi| at which the profile can be evaluated without overflow in
  // v^{-2/n} for n >= 1.
  double xi_limit() const {
    return family_ == ProfileFamily::cosh ? 200.0 / std::numbers::pi : std::numeric_limits<double>::infinity();
  }

  // log v(xi + h) as a truncated series in h.
  Series<double> log_v(double xi, int order) const {
    using S = Series<double>;
    const S t = S::variable(order, xi);
    switch (family_) {
      case ProfileFamily::cosh: {
        // log cosh(u) = |u| + log1p(exp(-2|u|)) - log 2, with u = pi (xi + h)
        const double sgn = xi >= 0 ? 1.0 : -1.0;
        const S u = (sgn * std::numbers::pi) * t;
        const S lc = u + log(1.0 + exp(-2.0 * u)) - std::log(2.0);
        return 0.5 * std::log(std::numbers::pi) - 0.5 * lc;
      }
      case ProfileFamily::power_law:
        return (-0.5 * alpha_) * log(1.0 + t * t);
      case ProfileFamily::stretched_exp:
        return (-beta_) * (pow(1.0 + t * t, 0.5 * alpha_) - 1.0);
    }
    return S(order);
  }

  double log_v(double xi) const {
    switch (family_) {
      case ProfileFamily::cosh: {
        const double u = std::numbers::pi * std::abs(xi);
        return 0.5 * std::log(std::numbers::pi) - 0.5 * (u + std::log1p(std::exp(-2 * u)) - std::log(2.0));
      }
      case ProfileFamily::power_law: return -0.5 * alpha_ * std::log1p(xi * xi);
      case ProfileFamily::stretched_exp: return -beta_ * (std::pow(1 + xi * xi, 0.5 * alpha_) - 1);
    }
    return 0.0;
  }

  double operator()(double xi) const { return std::exp(log_v(xi)); }

  // v(xi + h)^s as a series in h
  Series<double> power(double xi, double s, int order) const { return exp(s * log_v(xi, order)); }

  // v, v', ..., v^(order) at xi
  std::vector<double> v_derivatives(double xi, int order) const {
    if (order < 0 || order > 12) throw validation_error("v_derivatives: order must be in [0, 12]");
    const Series<double> s = power(xi, 1.0, order);
    std::vector<double> d(static_cast<std::size_t>(order) + 1);
    for (int j = 0; j <= order; ++j) d[static_cast<std::size_t>(j)] = s.derivative(j);
    return d;
  }

  // Distance from real xi to the nearest complex singularity of log v.
  double singularity_distance(double xi) const {
    return family_ == ProfileFamily::cosh ? 0.5 : std::sqrt(1.0 + xi * xi);
  }

 private:
  WeightProfile(ProfileFamily f, double a, double b) : family_(f), alpha_(a), beta_(b) {
    if (f != ProfileFamily::cosh && !(a > 0)) throw validation_error("profile: alpha must be positive");
    if (f == ProfileFamily::stretched_exp && !(b > 0)) throw validation_error("profile: beta must be positive");
  }
  ProfileFamily family_;
  double alpha_;
  double beta_;
};

// Constants of x(xi) = a0^{-1} e^{pi xi/n} + a1 + o(1) for the cosh profile.
inline double a0_constant(int n) {
  return std::numbers::pi * std::pow(2 * std::numbers::pi, 1.0 / n) / n;
}

namespace detail {
// (2 cosh(pi xi))^{1/n} - e^{pi xi/n}, without cancellation
inline double a1_integrand(double xi, int n) {
  const double pi = std::numbers::pi;
  return std::exp(pi * xi / n) * std::expm1(std::log1p(std::exp(-2 * pi * xi)) / n);
}
inline double a1_from_integral(double integral, int n) {
  const double c = std::pow(2 * std::numbers::pi, -1.0 / n);
  return c * integral - c * n / std::numbers::pi;
}
// Integrand below 1e-17 beyond this point.
inline double a1_cutoff(int n) { return 40.0 / (std::numbers::pi * (2.0 - 1.0 / n)); }
}  // namespace detail

enum class QuadratureRule { gauss_kronrod, tanh_sinh };

inline double a1_constant(int n, QuadratureRule rule = QuadratureRule::gauss_kronrod) {
  if (n < 1) throw validation_error("a1_constant: n must be >= 1");
  auto f = [n](double xi) { return detail::a1_integrand(xi, n); };
  const double b = detail::a1_cutoff(n);
  double integral = 0.0;
  if (rule == QuadratureRule::gauss_kronrod) {
    integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, b, 15, 1e-15);
  } else {
    boost::math::quadrature::tanh_sinh<double> ts;
    integral = ts.integrate(f, 0.0, b, 1e-15);
  }
  return detail::a1_from_integral(integral, n);
}

// x(xi) = int_0^xi v^{-2/n}.  A table of Taylor expansions of
// phi = v^{-2/n} is built once on a graded xi-grid; evaluation is a short
// series sum about the nearest node.
class ChangeOfVariables {
 public:
  static constexpr int series_order = 14;

  ChangeOfVariables(WeightProfile profile, int n, double x_cap = 1e15)
      : profile_(std::move(profile)), n_(n) {
    if (n < 1) throw validation_error("ChangeOfVariables: n must be >= 1");
    build(x_cap);
  }

  const WeightProfile& profile() const { return profile_; }
  int n() const { return n_; }
  double xi_max() const { return xi_.back(); }
  double x_max() const { return x_.back(); }

  // phi(xi + h) = v(xi + h)^{-2/n}
  Series<double> phi_series(double xi, int order) const { return profile_.power(xi, -2.0 / n_, order); }
  // psi(xi + h) = v(xi + h)^{1 - 1/n}
  Series<double> psi_series(double xi, int order) const { return profile_.power(xi, 1.0 - 1.0 / n_, order); }
  double phi(double xi) const { return std::exp(-2.0 / n_ * profile_.log_v(xi)); }

  double x_of_xi(double xi) const {
    if (!(std::abs(xi) <= xi_.back())) throw domain_error("x_of_xi: |xi| outside the tabulated range");
    const double a = std::abs(xi);
    const std::size_t i = nearest(a);
    const double r = x_[i] + local_integral(i, a - xi_[i]);
    return xi < 0 ? -r : r;
  }

  // Inverse map by Newton iteration on the local expansion.
  double xi_of_x(double x) const {
    if (!(std::abs(x) <= x_.back())) throw domain_error("xi_of_x: |x| outside the tabulated range");
    const double a = std::abs(x);
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), a) - x_.begin());
    i = i == 0 ? 0 : i - 1;
    if (i + 1 < x_.size() && a - x_[i] > x_[i + 1] - a) ++i;
    double d = (a - x_[i]) / coef_[i][0];
    for (int it = 0; it < 50; ++it) {
      const double f = x_[i] + local_integral(i, d) - a;
      const double step = f / local_phi(i, d);
      d -= step;
      if (std::abs(step) <= 1e-16 * (std::abs(xi_[i] + d) + 1e-300) + 1e-300) break;
    }
    const double r = xi_[i] + d;
    return x < 0 ? -r : r;
  }

  // xi'(x) = v(xi(x))^{2/n}
  double dxi_dx(double x) const { return 1.0 / phi(xi_of_x(x)); }

 private:
  std::size_t nearest(double a) const {
    std::size_t i = static_cast<std::size_t>(std::upper_bound(xi_.begin(), xi_.end(), a) - xi_.begin());
    i = i == 0 ? 0 : i - 1;
    if (i + 1 < xi_.size() && a - xi_[i] > xi_[i + 1] - a) ++i;
    return i;
  }

  double local_integral(std::size_t i, double d) const {
    const auto& c = coef_[i];
    double acc = 0.0;
    for (int k = series_order; k >= 0; --k) acc = acc * d + c[static_cast<std::size_t>(k)] / (k + 1);
    return acc * d;
  }

  double local_phi(std::size_t i, double d) const {
    const auto& c = coef_[i];
    double acc = 0.0;
    for (int k = series_order; k >= 0; --k) acc = acc * d + c[static_cast<std::size_t>(k)];
    return acc;
  }

  void build(double x_cap) {
    const double limit = profile_.xi_limit();
    double xi = 0.0, x = 0.0;
    for (;;) {
      const Series<double> s = phi_series(xi, series_order);
      xi_.push_back(xi);
      x_.push_back(x);
      coef_.push_back(s.coeffs());
      if (xi >= limit || (profile_.family() != ProfileFamily::cosh && x >= x_cap)) break;
      const double rate = std::abs(s[1] / s[0]);
      double h = std::min(0.25 * profile_.singularity_distance(xi), 0.25 / (rate + 1e-300));
      if (xi + h > limit) h = limit - xi;
      const double next = xi + h;
      const Series<double> sn = phi_series(next, series_order);
      if (!std::isfinite(sn[0]) || sn[0] > 1e300) break;
      // half step from each end
      double left = 0.0, right = 0.0;
      {
        double acc = 0.0, d = 0.5 * h;
        for (int k = series_order; k >= 0; --k) acc = acc * d + s[k] / (k + 1);
        left = acc * d;
        acc = 0.0;
        d = -0.5 * h;
        for (int k = series_order; k >= 0; --k) acc = acc * d + sn[k] / (k + 1);
        right = -acc * d;
      }
      x += left + right;
      xi = next;
    }
  }

  WeightProfile profile_;
  int n_;
  std::vector<double> xi_;
  std::vector<double> x_;
  std::vector<std::vector<double>> coef_;
};

// Asymptotic inverse xi(x) ~ (n/pi)(ln(a0 x) - a1/x) for the cosh profile.
inline double xi_asymptotic(double x, int n, double a1) {
  return n / std::numbers::pi * (std::log(a0_constant(n) * x) - a1 / x);
}

struct DecayParameters {
  double gamma = 0.0;             // v^2 <= C |x|^{-n gamma}
  double delta = 0.0;             // |v^(p)| <= C_p v^{1 + delta p}
  double C = 0.0;                 // fitted constant for gamma
  std::vector<double> C_p;        // fitted constants for delta, p = 1..4
};

namespace detail {
// least-squares slope of y against x
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace detail

// log x(xi) computed without forming x, so that rapidly growing profiles
// stay in range: log x = g(xi) + log int_0^xi exp(g(s) - g(xi)) ds with
// g = log phi.
inline double log_x_of_xi(const WeightProfile& v, int n, double xi) {
  auto g = [&](double s) { return -2.0 / n * v.log_v(s); };
  const double gx = g(xi);
  auto f = [&](double s) { return std::exp(g(s) - gx); };
  const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, xi, 20, 1e-14);
  return gx + std::log(I);
}

// Regression estimates of the exponents gamma and delta on xi in [5, 50].
inline DecayParameters decay_parameters(const WeightProfile& v, int n) {
  if (n < 1) throw validation_error("decay_parameters: n must be >= 1");
  const int samples = 46;
  std::vector<double> lx, lv2, lv;
  std::vector<std::vector<double>> ld(5);
  for (int i = 0; i < samples; ++i) {
    const double xi = 5.0 * std::pow(10.0, double(i) / (samples - 1));
    lx.push_back(log_x_of_xi(v, n, xi));
    // v^(p)/v from the normalized series, so that tiny v does not underflow
    Series<double> lg = v.log_v(xi, 4);
    const double l0 = lg[0];
    lg[0] = 0.0;
    const Series<double> s = exp(lg);
    lv.push_back(l0);
    lv2.push_back(2 * l0);
    for (int p = 1; p <= 4; ++p) ld[static_cast<std::size_t>(p)].push_back(l0 + std::log(std::abs(s.derivative(p))));
  }
  DecayParameters r;
  r.gamma = -detail::fit_slope(lx, lv2) / n;
  r.delta = 0.0;
  for (int p = 1; p <= 4; ++p) {
    const double slope = detail::fit_slope(lv, ld[static_cast<std::size_t>(p)]);
    r.delta = std::max(r.delta, (slope - 1.0) / p);
  }
  // constants as maxima over a grid much finer than the regression samples
  r.C_p.assign(4, 0.0);
  const int dense = 901;
  for (int i = 0; i < dense; ++i) {
    const double xi = 5.0 * std::pow(10.0, double(i) / (dense - 1));
    Series<double> lg = v.log_v(xi, 4);
    const double l0 = lg[0];
    lg[0] = 0.0;
    const Series<double> s = exp(lg);
    r.C = std::max(r.C, std::exp(2 * l0 + n * r.gamma * log_x_of_xi(v, n, xi)));
    for (int p = 1; p <= 4; ++p) {
      const double e = l0 + std::log(std::abs(s.derivative(p))) - (1 + r.delta * p) * l0;
      r.C_p[static_cast<std::size_t>(p - 1)] = std::max(r.C_p[static_cast<std::size_t>(p - 1)], std::exp(e));
    }
  }
  return r;
}

}  // namespace carleman
