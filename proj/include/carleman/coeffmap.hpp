#pragma once
// Map between the kernel polynomial P (h(t) = P(ln t)/t) and the symbol
// polynomial Q of the equivalent differential operator v Q(D) v.

#include <cmath>
#include <vector>

#include "carleman/errors.hpp"
#include "carleman/specfun.hpp"

namespace carleman {

// Real polynomial, coefficients lowest degree first.
struct RealPolynomial {
  std::vector<double> coeffs;

  RealPolynomial() = default;
  RealPolynomial(std::initializer_list<double> c) : coeffs(c) {}
  explicit RealPolynomial(std::vector<double> c) : coeffs(std::move(c)) {}

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double operator[](int m) const { return coeffs[static_cast<std::size_t>(m)]; }
  double leading() const { return coeffs.back(); }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
  }
};

namespace detail {
inline double binomial(int j, int m) {
  double b = 1.0;
  for (int i = 1; i <= m; ++i) b = b * (j - m + i) / i;
  return b;
}
}  // namespace detail

// q_m = sum_{j>=m} C(j, m) gamma^{(j-m)}(0) p_j with gamma(z) = 1/Gamma(1 - z).
inline RealPolynomial p_to_q(const RealPolynomial& p) {
  if (p.coeffs.empty()) throw validation_error("p_to_q: empty polynomial");
  const int n = p.degree();
  const RecipGammaSeries c = recip_gamma_taylor(n);
  std::vector<double> q(static_cast<std::size_t>(n) + 1, 0.0);
  for (int m = 0; m <= n; ++m) {
    double s = 0.0;
    // gamma^{(j-m)}(0) = (j-m)! c_{j-m}; C(j,m) (j-m)! = j!/m!
    for (int j = n; j >= m; --j) {
      double fact = 1.0;
      for (int i = 2; i <= j - m; ++i) fact *= i;
      s += detail::binomial(j, m) * fact * c.coeffs[static_cast<std::size_t>(j - m)] * p[j];
    }
    q[static_cast<std::size_t>(m)] = s;
  }
  return RealPolynomial(std::move(q));
}

// Inverse map by back substitution on the unit upper triangular system.
inline RealPolynomial q_to_p(const RealPolynomial& q) {
  if (q.coeffs.empty()) throw validation_error("q_to_p: empty polynomial");
  const int n = q.degree();
  const RecipGammaSeries c = recip_gamma_taylor(n);
  std::vector<double> p(static_cast<std::size_t>(n) + 1, 0.0);
  for (int m = n; m >= 0; --m) {
    double s = q[m];
    for (int j = m + 1; j <= n; ++j) {
      double fact = 1.0;
      for (int i = 2; i <= j - m; ++i) fact *= i;
      s -= detail::binomial(j, m) * fact * c.coeffs[static_cast<std::size_t>(j - m)] * p[static_cast<std::size_t>(j)];
    }
    p[static_cast<std::size_t>(m)] = s;
  }
  return RealPolynomial(std::move(p));
}

}  // namespace carleman
