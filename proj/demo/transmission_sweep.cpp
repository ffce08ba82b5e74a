// Transmission and reflection of the second-order Hankel operator with
// kernel ln(t)^2 / t, plus the truncation error estimate at each energy.

#include <cmath>
#include <cstdio>
#include <memory>

#include "carleman.hpp"

using namespace carleman;

int main() {
  const auto op = std::make_shared<const OperatorCoefficients>(p_to_q(RealPolynomial{0.0, 0.0, 1.0}),
                                                               WeightProfile::hankel());
  ScatteringSolver solver(gauged_field(op));
  std::printf("%8s %12s %12s %12s %12s\n", "lambda", "|t|", "|r|", "unitarity", "truncation");
  for (double lambda : {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const ScatteringRecord r = scattering_matrix(solver, lambda, 2000);
    const Eigen::Matrix2cd& S = r.S_extrapolated;
    std::printf("%8.3f %12.8f %12.8f %12.2e %12.2e\n", lambda, std::abs(S(0, 0)), std::abs(S(1, 0)),
                r.at_2X.unitarity_defect, r.truncation_estimate);
  }
}
