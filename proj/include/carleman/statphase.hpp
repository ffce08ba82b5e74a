#pragma once
// Stationary phase on a half-line with an explicit remainder bound:
//   J(N) = int_0^inf e^{iN omega(y)} g(y) dy
//        = 1/2 e^{i tau pi/4 + i N omega(0)} (2 pi)^{1/2} |omega''(0) N|^{-1/2} g(0) + R(N),
//   |R(N)| <= C (kappa^{-7/2} w2^{3/2} w3 g0 + kappa^{-2} w2 g1) |N|^{-1} (1 + |ln|w0 N||).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include "carleman/errors.hpp"
#include "carleman/liouville.hpp"
#include "carleman/specfun.hpp"

namespace carleman {

using RealFunction = std::function<double(double)>;

// Phase omega and amplitude g on [0, a] with g = 0 from a on.  Derivatives
// that are not supplied are taken numerically.
struct StationaryPhaseProblem {
  RealFunction omega, d1omega, d2omega, d3omega;
  RealFunction g, d1g;
  double a = 1.0;
  bool full_line = false;  // integrate over [-a, a]; the leading term doubles

  double w(double y, int m) const {
    const RealFunction* f[] = {&omega, &d1omega, &d2omega, &d3omega};
    if (*f[m]) return (*f[m])(y);
    // higher orders lose digits to cancellation at small steps
    return detail::numerical_derivative(omega, y, m, m >= 2 ? 10 * step() : step());
  }
  double gd(double y, int m) const {
    if (m == 0) return g(y);
    if (d1g) return d1g(y);
    return detail::numerical_derivative(g, y, 1, step());
  }
  double step() const { return 0.01 * a; }
};

// Moves a stationary point at y0 to the origin.
inline StationaryPhaseProblem shifted(const StationaryPhaseProblem& p, double y0, double a) {
  StationaryPhaseProblem q;
  auto sh = [y0](const RealFunction& f) -> RealFunction {
    if (!f) return {};
    return [f, y0](double y) { return f(y + y0); };
  };
  q.omega = sh(p.omega);
  q.d1omega = sh(p.d1omega);
  q.d2omega = sh(p.d2omega);
  q.d3omega = sh(p.d3omega);
  q.g = sh(p.g);
  q.d1g = sh(p.d1g);
  q.a = a;
  q.full_line = p.full_line;
  return q;
}

// Smooth cutoff: 1 on [0, a/2], 0 from a on.
inline double cutoff(double y, double a) {
  const double s = 2 * std::abs(y) / a - 1;
  if (s <= 0) return 1.0;
  if (s >= 1) return 0.0;
  const double u = std::exp(-1.0 / (1.0 - s)), v = std::exp(-1.0 / s);
  return u / (u + v);
}

namespace detail {

inline void check_phase(const StationaryPhaseProblem& p) {
  if (!p.omega || !p.g) throw validation_error("stationary phase: omega and g are required");
  if (!(p.a > 0)) throw validation_error("stationary phase: a must be positive");
  const int m = 400;
  const double lo = p.full_line ? -p.a : 0.0;
  const double s0 = p.w(0.0, 2);
  for (int i = 0; i <= m; ++i) {
    const double y = lo + (p.a - lo) * i / m;
    const double s = p.w(y, 2);
    if (!(s * s0 > 0)) throw validation_error("stationary phase: omega'' vanishes on the support");
  }
  if (std::abs(p.w(0.0, 1)) > 1e-8 * std::max(1.0, std::abs(s0)))
    throw validation_error("stationary phase: omega'(0) must vanish");
}

// int_0^{side a} e^{iN(omega - omega(0))} g, on panels where the phase
// advances by pi
inline cplx half_line(const StationaryPhaseProblem& p, double N, double side) {
  using G = boost::math::quadrature::gauss<double, 20>;
  const double w0 = p.omega(0.0);
  auto phase = [&](double y) { return std::abs(N) * std::abs(p.omega(side * y) - w0); };
  auto f = [&](double y) { return std::polar(p.g(side * y), N * (p.omega(side * y) - w0)); };
  const double a = p.a;
  const double c2 = std::abs(p.w(0.0, 2));
  cplx acc = 0.0;
  double y = 0.0, level = 0.0;
  while (y < a) {
    level += std::numbers::pi;
    // next y with phase(y) = level: guess, then safeguarded Newton
    double lo = y, hi;
    const double d1 = std::abs(p.w(side * y, 1));
    double guess = y == 0.0 ? std::sqrt(2 * level / (std::abs(N) * c2)) : y + std::numbers::pi / (std::abs(N) * std::max(d1, 1e-300));
    hi = std::min(a, std::max(guess, y + 1e-15));
    while (hi < a && phase(hi) < level) hi = std::min(a, y + 2 * (hi - y));
    double z = hi;
    if (phase(hi) > level) {
      z = 0.5 * (lo + hi);
      for (int it = 0; it < 100; ++it) {
        const double r = phase(z) - level;
        if (r > 0) hi = z; else lo = z;
        const double dz = r / (std::abs(N) * std::abs(p.w(side * z, 1)) + 1e-300);
        double zn = z - dz;
        if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
        if (std::abs(zn - z) <= 1e-15 * std::max(1.0, z)) { z = zn; break; }
        z = zn;
      }
    }
    acc += G::integrate(f, y, z);
    y = z;
  }
  return acc;
}

}  // namespace detail

inline cplx evaluate_J(const StationaryPhaseProblem& p, double N) {
  detail::check_phase(p);
  if (N == 0.0) throw domain_error("evaluate_J: N = 0");
  const cplx shift = std::polar(1.0, N * p.omega(0.0));
  cplx J = detail::half_line(p, N, 1.0);
  if (p.full_line) J += detail::half_line(p, N, -1.0);
  return shift * J;
}

inline cplx leading_term(const StationaryPhaseProblem& p, double N) {
  const double w2 = p.w(0.0, 2);
  const double tau = (w2 * N > 0) ? 1.0 : -1.0;
  const double mag = 0.5 * std::sqrt(2 * std::numbers::pi / std::abs(w2 * N)) * p.g(0.0);
  const cplx v = mag * std::polar(1.0, tau * std::numbers::pi / 4 + N * p.omega(0.0));
  return p.full_line ? 2.0 * v : v;
}

struct BoundConstants {
  double kappa = 0.0, w0 = 0.0, w2 = 0.0, w3 = 0.0, g0 = 0.0, g1 = 0.0, a = 0.0;

  double bound_shape(double N) const {
    const double an = std::abs(N);
    return (std::pow(kappa, -3.5) * std::pow(w2, 1.5) * w3 * g0 + std::pow(kappa, -2) * w2 * g1) / an *
           (1 + std::abs(std::log(w0 * an)));
  }
};

namespace detail {
// max over [lo, hi] of f by a grid scan refined with Brent's method
inline double grid_max(const RealFunction& f, double lo, double hi, int samples = 801) {
  double best = -1e300, yb = lo;
  const double h = (hi - lo) / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double y = lo + h * i, v = f(y);
    if (v > best) { best = v; yb = y; }
  }
  const double l = std::max(lo, yb - h), r = std::min(hi, yb + h);
  if (r > l) {
    auto res = boost::math::tools::brent_find_minima([&](double y) { return -f(y); }, l, r, 40);
    best = std::max(best, -res.second);
  }
  return best;
}
}  // namespace detail

inline BoundConstants bound_constants(const StationaryPhaseProblem& p) {
  detail::check_phase(p);
  const double lo = p.full_line ? -p.a : 0.0, hi = p.a;
  BoundConstants c;
  c.a = p.a;
  c.kappa = -detail::grid_max([&](double y) { return -std::abs(p.w(y, 2)); }, lo, hi);
  c.w0 = detail::grid_max([&](double y) { return std::abs(p.omega(y)); }, lo, hi);
  c.w2 = detail::grid_max([&](double y) { return std::abs(p.w(y, 2)); }, lo, hi);
  c.w3 = detail::grid_max([&](double y) { return std::abs(p.w(y, 3)); }, lo, hi);
  c.g0 = detail::grid_max([&](double y) { return std::abs(p.g(y)); }, lo, hi);
  c.g1 = detail::grid_max([&](double y) { return std::abs(p.gd(y, 1)); }, lo, hi);
  return c;
}

struct StationaryPhaseRecord {
  double N = 0.0;
  cplx direct = 0.0, leading = 0.0, remainder = 0.0;
  double bound_shape = 0.0;
  double ratio = 0.0;  // |R| / B(N)
};

struct StationaryPhaseReport {
  BoundConstants constants;
  std::vector<StationaryPhaseRecord> records;
  double implied_constant = 0.0;  // max ratio
  double decay_exponent = 0.0;    // -slope of ln|R| against ln|N|
};

inline StationaryPhaseReport verify_remainder(const StationaryPhaseProblem& p, const std::vector<double>& Ns) {
  StationaryPhaseReport rep;
  rep.constants = bound_constants(p);
  std::vector<double> lx, ly;
  for (double N : Ns) {
    StationaryPhaseRecord r;
    r.N = N;
    r.direct = evaluate_J(p, N);
    r.leading = leading_term(p, N);
    r.remainder = r.direct - r.leading;
    r.bound_shape = rep.constants.bound_shape(N);
    r.ratio = std::abs(r.remainder) / r.bound_shape;
    rep.implied_constant = std::max(rep.implied_constant, r.ratio);
    lx.push_back(std::log(std::abs(N)));
    ly.push_back(std::log(std::abs(r.remainder)));
    rep.records.push_back(r);
  }
  if (Ns.size() >= 2) rep.decay_exponent = -detail::fit_slope(lx, ly);
  return rep;
}

}  // namespace carleman
