#pragma once
// Shared test inputs.

#include <cmath>
#include <memory>
#include <vector>

#include "carleman/coeffmap.hpp"
#include "carleman/liouville.hpp"

namespace carleman::testing {

// Q = X^n, the symbol of a pure power P after the coefficient map.
inline RealPolynomial monomial_symbol(int n) {
  std::vector<double> p(static_cast<std::size_t>(n) + 1, 0.0);
  p.back() = 1.0;
  return p_to_q(RealPolynomial(p));
}

inline std::shared_ptr<const OperatorCoefficients> hankel_operator(int n) {
  return std::make_shared<const OperatorCoefficients>(monomial_symbol(n), WeightProfile::hankel());
}

// exp(-(x - c)^2 / (2 s^2)) and its derivatives via Hermite polynomials
inline TestFunction gaussian(double c = 0.3, double s = 1.0) {
  return [c, s](double x, int order) {
    const double u = (x - c) / s;
    std::vector<cplx> d(static_cast<std::size_t>(order) + 1);
    double hm = 1.0, h = u;  // probabilists' Hermite He_0, He_1
    const double g = std::exp(-0.5 * u * u);
    for (int k = 0; k <= order; ++k) {
      double he = k == 0 ? 1.0 : (k == 1 ? u : 0.0);
      if (k >= 2) {
        he = u * h - (k - 1) * hm;
        hm = h;
        h = he;
      }
      d[static_cast<std::size_t>(k)] = ((k % 2) ? -1.0 : 1.0) * he * g / std::pow(s, k);
    }
    return d;
  };
}

inline TestFunction sine(double k) {
  return [k](double x, int order) {
    std::vector<cplx> d(static_cast<std::size_t>(order) + 1);
    for (int m = 0; m <= order; ++m) d[static_cast<std::size_t>(m)] = std::pow(k, m) * std::sin(k * x + m * M_PI / 2);
    return d;
  };
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace carleman::testing
