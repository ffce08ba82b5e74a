#pragma once
// Large-time profile of exp(-iHT)u, with t handled as N = ln t.
//
// Stationary points solve xi'(nTy) N = |y|^{1/(n-1)} sgn y; for odd n the
// branch y_1 (t < 1) solves xi'(nTy) N = -y^{1/(n-1)} with y > 0.  Phases
//   Phi   = -xi(nTy) N + (n-1)|y|^{n/(n-1)} T + varrho(nTy),
//   Phi_1 = -xi(nTy_1) N - (n-1) y_1^{n/(n-1)} T + varrho(nTy_1).

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "carleman/errors.hpp"
#include "carleman/hankelphase.hpp"
#include "carleman/liouville.hpp"

namespace carleman {

struct StationaryPoints {
  std::optional<double> y;   // even n: the root; odd n: y_2 (t > 1)
  std::optional<double> y1;  // odd n, t < 1
  double residual = 0.0;     // largest residual among the roots found
};

namespace detail {

inline double dxi_dx(const OperatorCoefficients& op, double x) { return 1.0 / op.cov().phi(op.xi_of_x(x)); }

// positive root s of xi'(n|T|s)|N| = s^{1/(n-1)}
inline double stationary_modulus(const OperatorCoefficients& op, double N, double T, double* residual) {
  const int n = op.n();
  const double p = 1.0 / (n - 1);
  auto G = [&](double s) { return dxi_dx(op, n * std::abs(T) * s) * std::abs(N) - std::pow(s, p); };
  const double seed = std::pow(std::abs(N / (std::numbers::pi * T)), double(n - 1) / n);
  double lo = 0.5 * seed, hi = 2 * seed;
  while (G(lo) < 0) lo *= 0.5;
  while (G(hi) > 0) hi *= 2;
  std::uintmax_t it = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(std::abs(a), std::abs(b)); };
  const auto r = boost::math::tools::toms748_solve(G, lo, hi, tol, it);
  const double s = 0.5 * (r.first + r.second);
  if (residual) *residual = std::abs(G(s));
  return s;
}

}  // namespace detail

inline StationaryPoints stationary_point_y(const OperatorCoefficients& op, double N, double T) {
  const int n = op.n();
  if (n < 2) throw validation_error("stationary_point_y: n must be >= 2");
  if (N == 0.0 || T == 0.0) throw domain_error("stationary_point_y: ln t and T must be nonzero");
  StationaryPoints sp;
  double res = 0.0;
  const double s = detail::stationary_modulus(op, N, T, &res);
  sp.residual = res;
  if (n % 2 == 0) {
    sp.y = N > 0 ? s : -s;
  } else if (N > 0) {
    sp.y = s;
  } else {
    sp.y1 = s;
  }
  return sp;
}

struct EvolutionPhases {
  std::optional<double> Phi;   // even n, or odd n with t > 1
  std::optional<double> Phi1;  // odd n with t < 1
};

inline EvolutionPhases evolution_phase(const OperatorCoefficients& op, double N, double T) {
  const int n = op.n();
  const StationaryPoints sp = stationary_point_y(op, N, T);
  const double q = double(n) / (n - 1);
  EvolutionPhases ph;
  if (sp.y) {
    const double x = n * T * *sp.y;
    ph.Phi = -op.xi_of_x(x) * N + (n - 1) * std::pow(std::abs(*sp.y), q) * T + varrho(op, x);
  }
  if (sp.y1) {
    const double x = n * T * *sp.y1;
    ph.Phi1 = -op.xi_of_x(x) * N - (n - 1) * std::pow(*sp.y1, q) * T + varrho(op, x);
  }
  return ph;
}

// omega(y) = -xi(nTy) N / T + (n-1)|y|^{n/(n-1)}, the phase divided by T
inline double evolution_omega(const OperatorCoefficients& op, double y, double N, double T) {
  const int n = op.n();
  return -op.xi_of_x(n * T * y) * N / T + (n - 1) * std::pow(std::abs(y), double(n) / (n - 1));
}

// (Yf)(x) = (n-1)^{-1/2} |x|^{-(n-2)/(2(n-1))} fhat(sgn x |x|^{1/(n-1)})
using ComplexFunction = std::function<cplx(double)>;

inline ComplexFunction y_map(ComplexFunction fhat, int n) {
  if (n < 2) throw validation_error("y_map: n must be >= 2");
  return [fhat = std::move(fhat), n](double x) -> cplx {
    if (x == 0.0) return n == 2 ? fhat(0.0) : cplx(0.0);
    const double ax = std::abs(x);
    const double arg = std::copysign(std::pow(ax, 1.0 / (n - 1)), x);
    return std::pow(ax, -double(n - 2) / (2.0 * (n - 1))) / std::sqrt(double(n - 1)) * fhat(arg);
  };
}

// Leading-order prediction for sqrt(t) (exp(-iHT)u)(t) on an N-grid; the
// mass of the prediction is int |U|^2 dN.
struct EvolutionProfile {
  int n = 0;
  double T = 0.0;
  std::vector<double> N;
  std::vector<std::optional<double>> y, y1;
  std::vector<std::optional<double>> Phi, Phi1;
  std::vector<cplx> U;           // total prediction
  std::vector<cplx> U1;          // j = 1 branch (odd n)
  double max_residual = 0.0;
};

inline EvolutionProfile evolution_profile(const OperatorCoefficients& op, const ComplexFunction& f,
                                          const std::vector<double>& Ngrid, double T) {
  const int n = op.n();
  if (n < 2) throw validation_error("evolution_profile: n must be >= 2");
  const double pi = std::numbers::pi;
  EvolutionProfile ep;
  ep.n = n;
  ep.T = T;
  ep.N = Ngrid;
  for (double N : Ngrid) {
    const StationaryPoints sp = stationary_point_y(op, N, T);
    const EvolutionPhases ph = evolution_phase(op, N, T);
    ep.max_residual = std::max(ep.max_residual, sp.residual);
    const double r = std::abs(N / (pi * T));
    const double amp = std::sqrt((n - 1) / (pi * n * std::abs(T))) * std::pow(r, -1.0 / (2 * n));
    const double arg = std::pow(r, double(n - 1) / n);
    cplx u = 0.0, u1 = 0.0;
    if (n % 2 == 0) {
      u = std::polar(amp, *ph.Phi) * f(N > 0 ? arg : -arg);
    } else if (N > 0) {
      u = std::polar(amp, *ph.Phi) * f(arg);
    } else {
      u1 = std::polar(amp, *ph.Phi1) * f(-arg);
      u = u1;
    }
    ep.y.push_back(sp.y);
    ep.y1.push_back(sp.y1);
    ep.Phi.push_back(ph.Phi);
    ep.Phi1.push_back(ph.Phi1);
    ep.U.push_back(u);
    ep.U1.push_back(u1);
  }
  return ep;
}

}  // namespace carleman
