// For odd order the generalized eigenfunctions are lit on one side only:
// sqrt(t) theta(t, k) oscillates for ln t -> +inf and dies out for ln t -> -inf
// when k > 0.

#include <cmath>
#include <cstdio>
#include <memory>

#include "carleman.hpp"

using namespace carleman;

int main() {
  const auto op = std::make_shared<const OperatorCoefficients>(p_to_q(RealPolynomial{0.0, 0.0, 0.0, 1.0}),
                                                               WeightProfile::hankel());
  const double k = 1.0, X = 4000;
  ScatteringSolver solver(gauged_field(op));
  const ScatteringEntry e = solver.entry(k * k * k, X);
  const HankelEigenfunction h(op, solver.field(k, X));
  const PhaseModel m(*op, k);
  std::printf("s(1) = %.10f %+.10fi\n", e.s().real(), e.s().imag());
  std::printf("%6s %14s %14s\n", "ln t", "|Theta|", "|Theta_asym|");
  for (double N = -30; N <= 30; N += 5) {
    if (N == 0) continue;
    std::printf("%6.1f %14.6e %14.6e\n", N, std::abs(h.evaluate(N).Theta), std::abs(theta_asymptotic(N, m, e.S)));
  }
}
