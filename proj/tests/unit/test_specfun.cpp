#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "carleman/specfun.hpp"

using namespace carleman;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// Richardson-extrapolated central differences of 1/Gamma(1 - z) at 0,
// built on std::tgamma only.
double fd_recip_gamma(int order) {
  auto f = [](double z) { return 1.0 / std::tgamma(1.0 - z); };
  auto central = [&](double h) {
    if (order == 1) return (f(h) - f(-h)) / (2 * h);
    return (f(h) - 2 * f(0) + f(-h)) / (h * h);
  };
  double t[4];
  for (int i = 0; i < 4; ++i) t[i] = central(0.1 / (1 << i));
  double p = 4;
  for (int l = 1; l < 4; ++l, p *= 4)
    for (int i = 3; i >= l; --i) t[i] = (p * t[i] - t[i - 1]) / (p - 1);
  return order == 1 ? t[3] : t[3] / 2;
}

}  // namespace

TEST(ComplexGamma, ClassicalValues) {
  EXPECT_NEAR(std::abs(complex_gamma(1.0) - 1.0), 0.0, 1e-14);
  EXPECT_LT(rel(complex_gamma(0.5), std::sqrt(std::numbers::pi)), 1e-13);
  const double m = std::norm(complex_gamma(cplx(0.5, -1.0)));
  EXPECT_NEAR(m, std::numbers::pi / std::cosh(std::numbers::pi), 1e-13);
}

TEST(ComplexGamma, ReferenceValuesOnTheStrip) {
  // 30-digit reference values
  EXPECT_LT(rel(complex_gamma(cplx(1, 1)), cplx(0.498015668118356042713691117462, -0.154949828301810685124955130484)), 1e-12);
  EXPECT_LT(rel(complex_gamma(cplx(-2.5, 0.5)), cplx(-0.33387520352243233740327727034, -0.206457307963608414918287607564)), 1e-12);
  EXPECT_LT(rel(complex_gamma(cplx(0.5, 100)), cplx(-1.0917856897818829481e-68, 1.049640686487808307e-68)), 1e-12);
  EXPECT_LT(rel(complex_gamma(cplx(-9.3, 50)), cplx(-3.695493286450314707e-51, -1.7783246677593283565e-51)), 1e-12);
  EXPECT_LT(rel(complex_gamma(cplx(-9.7, 0.2)), cplx(1.6591105804861787439e-6, 1.3317797830441045117e-7)), 1e-12);
  EXPECT_LT(rel(complex_gamma(cplx(3.3, -7.1)), cplx(-0.0028735005700126505489, 0.0088420581220191471338)), 1e-12);
}

TEST(ComplexGamma, MatchesRealGammaOffThePoles) {
  for (double x = -9.75; x <= 10; x += 0.5) EXPECT_LT(rel(complex_gamma(x), std::tgamma(x)), 1e-12) << x;
}

TEST(ComplexGamma, PolesThrow) {
  EXPECT_THROW(complex_gamma(0.0), domain_error);
  EXPECT_THROW(complex_gamma(-3.0), domain_error);
}

TEST(ComplexGamma, ReflectionIdentity) {
  std::mt19937_64 rng(20261017);
  std::uniform_real_distribution<double> re(-10, 10), im(-5, 5);
  for (int i = 0; i < 100; ++i) {
    cplx z(re(rng), im(rng));
    if (std::abs(z.imag()) < 1e-3) z += cplx(0, 0.1);
    const cplx r = complex_gamma(z) * complex_gamma(1.0 - z) * std::sin(std::numbers::pi * z) / std::numbers::pi;
    EXPECT_LT(std::abs(r - 1.0), 1e-10) << z;
  }
}

TEST(RecipGamma, LowOrderCoefficients) {
  EXPECT_EQ(recip_gamma_taylor(0).coeffs, std::vector<double>{1.0});
  const RecipGammaSeries s = recip_gamma_taylor(8);
  EXPECT_EQ(s.coeffs[0], 1.0);
  EXPECT_NEAR(s.coeffs[1], -0.5772156649, 1e-10);
  const double g = euler_gamma, pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(s.coeffs[2], (g * g - pi2 / 6) / 2, 1e-14);
  EXPECT_NEAR(s.coeffs[1], fd_recip_gamma(1), 1e-9);
  EXPECT_NEAR(s.coeffs[2], fd_recip_gamma(2), 1e-8);
}

TEST(RecipGamma, ReferenceCoefficients) {
  const double ref[] = {1.0, -0.57721566490153286061, -0.65587807152025388108, 0.042002635034095235529,
                        0.1665386113822914895, 0.042197734555544336748, -0.0096219715278769735621,
                        -0.0072189432466630995424, -0.0011651675918590651121};
  const RecipGammaSeries s = recip_gamma_taylor(8);
  for (int j = 0; j <= 8; ++j) EXPECT_NEAR(s.coeffs[static_cast<std::size_t>(j)], ref[j], 1e-13) << j;
}

TEST(RecipGamma, SeriesReproducesFunction) {
  const RecipGammaSeries s = recip_gamma_taylor(14);
  for (double z = -0.4; z <= 0.4; z += 0.05) EXPECT_NEAR(s(z), 1.0 / std::tgamma(1.0 - z), 1e-8) << z;
  EXPECT_THROW(recip_gamma_taylor(31), validation_error);
}

TEST(EtaPhase, SymmetryAndReferenceValues) {
  EXPECT_EQ(eta_phase(0.0), 0.0);
  for (double xi : {0.5, 2.0, 10.0}) EXPECT_NEAR(eta_phase(-xi), -eta_phase(xi), 1e-14);
  EXPECT_NEAR(eta_phase(0.5), -0.750729202122050744645009792019, 1e-12);
  EXPECT_NEAR(eta_phase(2.0), -0.592536981977034588934051205275, 1e-12);
  EXPECT_NEAR(eta_phase(10.0), 13.0300200349110898508075452634, 1e-11);
}

TEST(EtaPhase, StirlingAtFifty) {
  EXPECT_NEAR(eta_phase(50.0) - (50 * std::log(50.0) - 50), 0.0, 1e-2);
}

TEST(EtaPhase, NoBranchJumps) {
  double prev = eta_phase(-100.0);
  for (int i = 1; i <= 20000; ++i) {
    const double cur = eta_phase(-100.0 + 0.01 * i);
    EXPECT_LT(std::abs(cur - prev), std::numbers::pi / 2);
    prev = cur;
  }
}

TEST(EtaPhase, UnwrapRecoversContinuousBranch) {
  std::vector<double> wrapped, direct;
  for (int i = 0; i <= 2000; ++i) {
    const double xi = 0.05 * i;
    direct.push_back(eta_phase(xi));
    wrapped.push_back(std::remainder(direct.back(), 2 * std::numbers::pi));
  }
  const std::vector<double> u = unwrap_phase(wrapped);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(u[i], direct[i], 1e-10);
}
