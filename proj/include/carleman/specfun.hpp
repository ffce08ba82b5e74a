#pragma once
// Complex gamma function, Taylor coefficients of 1/Gamma(1 - z) and the
// continuous phase eta(xi) of Gamma(1/2 - i xi).

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "carleman/errors.hpp"
#include "carleman/series.hpp"

namespace carleman {

using cplx = std::complex<double>;

inline constexpr double euler_gamma = std::numbers::egamma;

namespace detail {

// Lanczos coefficients for g = 7, nine terms.
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_p = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// log Gamma(z) for Re z >= 1/2.  Every logarithm taken here has an argument
// in the right half-plane, so the result is continuous in z there.
inline cplx log_gamma_right(cplx z) {
  const cplx zm = z - 1.0;
  cplx a = lanczos_p[0];
  for (std::size_t i = 1; i < lanczos_p.size(); ++i) a += lanczos_p[i] / (zm + double(i));
  const cplx t = zm + lanczos_g + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (zm + 0.5) * std::log(t) - t + std::log(a);
}

inline bool is_gamma_pole(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

}  // namespace detail

inline cplx complex_gamma(cplx z) {
  if (detail::is_gamma_pole(z)) throw domain_error("complex_gamma: pole at non-positive integer");
  if (z.real() < 0.5) {
    const double pi = std::numbers::pi;
    return pi / (std::sin(pi * z) * std::exp(detail::log_gamma_right(1.0 - z)));
  }
  return std::exp(detail::log_gamma_right(z));
}

// Coefficients c_j of 1/Gamma(1 - z) = sum_j c_j z^j.
struct RecipGammaSeries {
  int order = 0;
  std::vector<double> coeffs;

  double operator()(double z) const {
    double acc = 0.0;
    for (int j = order; j >= 0; --j) acc = acc * z + coeffs[static_cast<std::size_t>(j)];
    return acc;
  }
};

// From log(1/Gamma(1 - z)) = -gamma_E z - sum_{k>=2} zeta(k) z^k / k.
inline RecipGammaSeries recip_gamma_taylor(int order) {
  if (order < 0 || order > 30) throw validation_error("recip_gamma_taylor: order must be in [0, 30]");
  Series<double> lg(order);
  if (order >= 1) lg[1] = -euler_gamma;
  for (int k = 2; k <= order; ++k) lg[k] = -std::riemann_zeta(double(k)) / k;
  Series<double> g = exp(lg);
  RecipGammaSeries r;
  r.order = order;
  r.coeffs = g.coeffs();
  r.coeffs[0] = 1.0;
  return r;
}

// eta(xi) = -Im log Gamma(1/2 - i xi), continuous with eta(0) = 0 and odd.
inline double eta_phase(double xi) {
  return -detail::log_gamma_right(cplx(0.5, -xi)).imag();
}

// Unwrapped eta over a monotone sweep, for callers that hold only the
// unit-modulus factor Gamma(1/2 - i xi)/|Gamma(1/2 - i xi)|.
inline std::vector<double> unwrap_phase(const std::vector<double>& wrapped) {
  std::vector<double> out(wrapped.size());
  double offset = 0.0;
  for (std::size_t i = 0; i < wrapped.size(); ++i) {
    if (i > 0) {
      double d = wrapped[i] + offset - out[i - 1];
      while (d > std::numbers::pi) { offset -= 2 * std::numbers::pi; d -= 2 * std::numbers::pi; }
      while (d < -std::numbers::pi) { offset += 2 * std::numbers::pi; d += 2 * std::numbers::pi; }
    }
    out[i] = wrapped[i] + offset;
  }
  return out;
}

}  // namespace carleman
