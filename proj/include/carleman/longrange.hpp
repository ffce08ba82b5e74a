#pragma once
// Approximate eikonal phase for long-range coefficients: sigma_j(x,k) by
// fixed-point iteration, theta(x,k) = int_0^x sigma, and the residual
// symbol v = n k^{n-1} (sigma_j - sigma_{j+1}).
//
// The coefficients b_m are complex in general, so sigma_j, theta and v are
// complex valued.

#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "carleman/coeffmap.hpp"
#include "carleman/errors.hpp"
#include "carleman/liouville.hpp"

namespace carleman {

class PhaseIteration {
 public:
  // gauged = true iterates with b~_m instead of b_m
  PhaseIteration(std::shared_ptr<const OperatorCoefficients> op, bool gauged = false)
      : op_(std::move(op)), gauged_(gauged) {
    if (op_->n() < 1) throw validation_error("PhaseIteration: n must be positive");
  }

  int n() const { return op_->n(); }

  // sigma_0 .. sigma_{j_max} at (x, k)
  std::vector<cplx> sigmas(int j_max, double x, double k) const {
    check(j_max, k, 9);
    return iterate(coefficients(x), j_max, k);
  }

  cplx sigma(int j, double x, double k) const {
    check(j, k);
    return sigmas(j, x, k).back();
  }

  cplx residual(int j, double x, double k) const {
    check(j, k);
    const std::vector<cplx> s = sigmas(j + 1, x, k);
    return double(n()) * std::pow(k, n() - 1) * (s[static_cast<std::size_t>(j)] - s[static_cast<std::size_t>(j + 1)]);
  }

  // Right side of the eikonal relation evaluated at sigma = sigma_j; equals
  // the residual symbol by construction.
  cplx eikonal(int j, double x, double k) const {
    const std::vector<cplx> b = coefficients(x);
    const cplx s = sigma(j, x, k);
    const int nn = n();
    cplx v = double(nn) * std::pow(k, nn - 1) * s;
    for (int p = 2; p <= nn; ++p) v += detail::binomial(nn, p) * std::pow(s, p) * std::pow(k, nn - p);
    for (int m = 0; m < nn; ++m) v += b[static_cast<std::size_t>(m)] * std::pow(k + s, m);
    return v;
  }

  // theta_j(x, k) = int_0^x sigma_j(y, k) dy, on geometrically growing pieces
  cplx theta(int j, double x, double k, double tol = 1e-9) const {
    check(j, k);
    if (x == 0.0) return 0.0;
    const double sgn = x > 0 ? 1.0 : -1.0, ax = std::abs(x);
    auto re = [&](double y) { return sigma(j, sgn * y, k).real(); };
    auto im = [&](double y) { return sigma(j, sgn * y, k).imag(); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    cplx acc = 0.0;
    double lo = 0.0, hi = std::min(1.0, ax);
    while (lo < ax) {
      acc += cplx(GK::integrate(re, lo, hi, 8, tol), GK::integrate(im, lo, hi, 8, tol));
      lo = hi;
      hi = std::min(2 * hi, ax);
    }
    return sgn * acc;
  }

 private:
  static void check(int j, double k, int j_cap = 8) {
    if (k == 0.0) throw domain_error("PhaseIteration: k = 0 is a singular point of the dispersion");
    if (j < 0 || j > j_cap) throw validation_error("PhaseIteration: iteration index out of range");
  }

  std::vector<cplx> coefficients(double x) const { return gauged_ ? op_->b_tilde(x) : op_->b(x); }

  std::vector<cplx> iterate(const std::vector<cplx>& b, int j_max, double k) const {
    const int nn = n();
    const double lead = nn * std::pow(k, nn - 1);
    std::vector<cplx> s{0.0};
    for (int j = 0; j < j_max; ++j) {
      const cplx sj = s.back();
      cplx rhs = 0.0;
      if (j > 0)
        for (int p = 2; p <= nn; ++p) rhs -= detail::binomial(nn, p) * std::pow(sj, p) * std::pow(k, nn - p);
      for (int m = 0; m < nn; ++m) rhs -= b[static_cast<std::size_t>(m)] * std::pow(k + sj, m);
      s.push_back(rhs / lead);
    }
    return s;
  }

  std::shared_ptr<const OperatorCoefficients> op_;
  bool gauged_;
};

inline cplx sigma_iterate(const PhaseIteration& it, int j, double x, double k) { return it.sigma(j, x, k); }
inline cplx theta_phase(const PhaseIteration& it, int j, double x, double k) { return it.theta(j, x, k); }
inline cplx residual_symbol(const PhaseIteration& it, int j, double x, double k) { return it.residual(j, x, k); }

// Power-law fit |sigma_j - sigma_{j-1}| ~ C x^slope on log-spaced x.
struct IterationDecay {
  int j = 0;
  double slope = 0.0;
  double constant = 0.0;
};

inline std::vector<IterationDecay> iteration_decay(const PhaseIteration& it, int j_max, double k,
                                                   double x_lo = 1e2, double x_hi = 1e5, int samples = 25) {
  std::vector<std::vector<double>> ly(static_cast<std::size_t>(j_max) + 1);
  std::vector<double> lx;
  for (int i = 0; i < samples; ++i) {
    const double x = x_lo * std::pow(x_hi / x_lo, double(i) / (samples - 1));
    const std::vector<cplx> s = it.sigmas(j_max, x, k);
    lx.push_back(std::log(x));
    for (int j = 1; j <= j_max; ++j) ly[static_cast<std::size_t>(j)].push_back(std::log(std::abs(s[static_cast<std::size_t>(j)] - s[static_cast<std::size_t>(j - 1)])));
  }
  std::vector<IterationDecay> out;
  for (int j = 1; j <= j_max; ++j) {
    IterationDecay d;
    d.j = j;
    d.slope = detail::fit_slope(lx, ly[static_cast<std::size_t>(j)]);
    double mean_x = 0, mean_y = 0;
    for (int i = 0; i < samples; ++i) {
      mean_x += lx[static_cast<std::size_t>(i)] / samples;
      mean_y += ly[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] / samples;
    }
    d.constant = std::exp(mean_y - d.slope * mean_x);
    out.push_back(d);
  }
  return out;
}

// Cutoff chi(lambda) supported in [lo, hi] with 0 < lo < hi; a smooth bump
// exp(-1/(s(1-s))) normalized to 1 at the midpoint.
struct EnergyCutoff {
  double lo = 0.5, hi = 2.0;

  double operator()(double lambda) const {
    if (!(lambda > lo && lambda < hi)) return 0.0;
    const double s = (lambda - lo) / (hi - lo);
    return std::exp(4.0 - 1.0 / (s * (1 - s)));
  }
};

// Symbol of the identification operator as data: e^{i theta} chi(k^n).
inline cplx identification_symbol(const PhaseIteration& it, int j, double x, double k, const EnergyCutoff& chi) {
  return std::exp(cplx(0, 1) * it.theta(j, x, k)) * chi(std::pow(k, it.n()));
}

}  // namespace carleman
