#pragma once
// Hankel side of the correspondence: the kernel h(t) = P(ln t)/t, the
// transform F, the phase functions of the eigenfunction asymptotics, and
// numerical evaluation of the eigenfunctions
//   theta(t,k) = (2 pi)^{-1/2} t^{-1/2} I(ln t, k),
//   I(N,k) = int e^{-i xi(x) N} zeta(x) psi~(x,k) dx.
// Throughout t enters only through N = ln t.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "carleman/coeffmap.hpp"
#include "carleman/errors.hpp"
#include "carleman/liouville.hpp"
#include "carleman/profile.hpp"
#include "carleman/scattering.hpp"
#include "carleman/specfun.hpp"

namespace carleman {

inline double hankel_kernel(double t, const RealPolynomial& P) {
  if (!(t > 0)) throw domain_error("hankel_kernel: t must be positive");
  return P(std::log(t)) / t;
}

// varrho(x) = eta(xi(x)) - q_{n-1} xi(x)/n
inline double varrho(const OperatorCoefficients& op, double x) {
  const double xi = op.xi_of_x(x);
  return eta_phase(xi) - op.qn1() * xi / op.n();
}

// Large-x form pi^{-1} ln(a0 x) (n ln|pi^{-1} n ln(a0 x)| - n - q_{n-1}),
// cosh profile, x > 0.
inline double varrho_asymptotic(const OperatorCoefficients& op, double x) {
  const double pi = std::numbers::pi;
  const int n = op.n();
  const double L = std::log(a0_constant(n) * x);
  return L / pi * (n * std::log(std::abs(n * L / pi)) - n - op.qn1());
}

// zeta(x) = e^{i varrho(x)} xi'(x)^{1/2}
inline cplx zeta_amplitude(const OperatorCoefficients& op, double x) {
  const double xi = op.xi_of_x(x);
  const double dxi = 1.0 / op.cov().phi(xi);
  return std::polar(std::sqrt(dxi), eta_phase(xi) - op.qn1() * xi / op.n());
}

// Phase functions gamma_0, gamma_1, gamma(N,k) and omega(t,k) = gamma(ln t,k).
struct PhaseModel {
  int n = 0;
  double k = 0.0;
  double qn1 = 0.0;
  double a0 = 0.0;
  double a1 = 0.0;

  PhaseModel() = default;
  PhaseModel(const OperatorCoefficients& op, double k_)
      : n(op.n()), k(k_), qn1(op.qn1()), a0(a0_constant(op.n())), a1(a1_constant(op.n())) {
    if (n < 1) throw validation_error("PhaseModel: n must be >= 1");
    if (k == 0.0) throw domain_error("PhaseModel: k = 0");
  }

  double gamma0(double s) const {
    const double pi = std::numbers::pi;
    return -n / pi * std::log(std::pow(2 * pi, 1.0 / n) * s) + n / pi;
  }
  double gamma1(double s) const {
    const double pi = std::numbers::pi;
    const double L = std::log(std::pow(2 * pi, 1.0 / n) * s);
    return L / pi * (n * std::log(std::abs(n * L / pi)) - n - qn1);
  }
  double gamma(double N) const {
    if (N == 0.0) throw domain_error("phase_gamma: N = 0");
    if (k == 0.0) throw domain_error("phase_gamma: k = 0");
    const double s = std::abs(N / k);
    const double sg = N > 0 ? 1.0 : -1.0;
    return N * gamma0(s) + gamma1(s) + sg * (std::numbers::pi / 4 + a1 * std::abs(k));
  }
  double omega_log(double N) const { return gamma(N); }
};

inline double phase_gamma(double N, const PhaseModel& m) { return m.gamma(N); }

// Scattering data at lambda = k^n in the layout of ScatteringEntry.
// Returns the leading term of Theta = sqrt(t) theta(t,k) at N = ln t.
inline cplx theta_asymptotic(double N, const PhaseModel& m, const Eigen::Matrix2cd& S) {
  const double w = m.gamma(N);
  const cplx ep = std::polar(1.0, w), em = std::polar(1.0, -w);
  const double amp = std::sqrt(m.n / (std::numbers::pi * std::abs(m.k)));
  if (m.n % 2 == 1) {
    const bool lit = (m.k > 0) == (N > 0);
    return lit ? amp * (S(0, 0) * ep + em) : cplx(0.0);
  }
  if (m.k > 0) return N > 0 ? amp * (S(0, 0) * ep + em) : amp * S(1, 0) * em;
  return N > 0 ? amp * S(0, 1) * ep : amp * (ep + S(1, 1) * em);
}

namespace detail {

inline cplx interpolate(const Mesh& mesh, const CVector& v, double x) {
  const std::size_t j = mesh.panel_of(x);
  const double a = mesh.edges[j], b = mesh.edges[j + 1];
  const auto L = lagrange_basis(2 * (x - a) / (b - a) - 1);
  cplx s = 0.0;
  for (int l = 0; l < Mesh::order; ++l)
    s += L[static_cast<std::size_t>(l)] * v(static_cast<Eigen::Index>(j * Mesh::order + static_cast<std::size_t>(l)));
  return s;
}

// C-infinity step: 1 on (-inf, 0], 0 on [1, inf)
inline double smooth_step(double s) {
  if (s <= 0) return 1.0;
  if (s >= 1) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - s)), b = std::exp(-1.0 / s);
  return a / (a + b);
}

}  // namespace detail

struct ThetaOptions {
  double N_max = 35.0;
  double core_radius = 0.0;  // 0: twice the outermost stationary point plus a margin
  double core_scale = 1.0;
  double window = 0.0;       // 0: automatic tail window length
  double density = 1.0;      // quadrature panels per unit of phase, relative
};

struct ThetaValue {
  double N = 0.0;
  cplx Theta = 0.0;  // sqrt(t) theta(t,k)
  cplx core = 0.0;
  cplx tail = 0.0;
};

// theta(t,k) for one k from a solved eigenfunction field of the gauged
// operator.  The core |x| <= X_core holds every stationary point of
// -xi(x)N +- kx for |N| <= N_max and uses psi~ itself; beyond it psi~ is
// replaced by psi_osc = e^{ikx} r_+ + e^{-ikx} r_-, whose phase has no
// stationary points there.  The conditionally convergent tails are summed
// with a smooth window of length L, which converges faster than any power
// of 1/(|k| L).
class HankelEigenfunction {
 public:
  HankelEigenfunction(std::shared_ptr<const OperatorCoefficients> op, EigenfunctionField field,
                      ThetaOptions opt = {})
      : op_(std::move(op)), field_(std::move(field)), opt_(opt) {
    if (op_->n() < 1) throw validation_error("theta_integral: n must be >= 1");
    if (field_.n != op_->n()) throw validation_error("theta_integral: field order does not match the operator");
    dec_ = decompose(field_);
    lim_ = r_functions(field_);
    build();
  }

  double k() const { return field_.k; }
  double core_radius() const { return Xc_; }
  double window() const { return L_; }
  std::size_t nodes() const { return x_.size(); }

  // outermost x with |N| xi'(x) = |k|
  double stationary_point(double N) const {
    const double target = std::abs(field_.k) / std::abs(N);
    auto dxi = [&](double x) { return 1.0 / op_->cov().phi(op_->xi_of_x(x)); };
    if (dxi(0.0) <= target) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (dxi(hi) > target) hi *= 2;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (dxi(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  ThetaValue evaluate(double N) const {
    if (std::abs(N) > opt_.N_max * (1 + 1e-12))
      throw validation_error("theta_integral: |N| exceeds N_max of this evaluator");
    ThetaValue v;
    v.N = N;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const cplx term = std::polar(1.0, -xi_[i] * N) * f_[i];
      (core_[i] ? v.core : v.tail) += term;
    }
    const double c = 1.0 / std::sqrt(2 * std::numbers::pi);
    v.core *= c;
    v.tail *= c;
    v.Theta = v.core + v.tail;
    return v;
  }

  std::vector<ThetaValue> evaluate(const std::vector<double>& Ns) const {
    std::vector<ThetaValue> out(Ns.size());
    for (std::size_t i = 0; i < Ns.size(); ++i) out[i] = evaluate(Ns[i]);
    return out;
  }

 private:
  cplx psi_osc(double x) const {
    const Mesh& m = *field_.mesh;
    cplx rp, rm;
    if (std::abs(x) < m.X) {
      rp = detail::interpolate(m, dec_.r_plus, x);
      rm = detail::interpolate(m, dec_.r_minus, x);
    } else if (x > 0) {
      rp = lim_.r_plus_plus_inf;
      rm = lim_.r_minus_plus_inf;
    } else {
      rp = lim_.r_plus_minus_inf;
      rm = lim_.r_minus_minus_inf;
    }
    const cplx e = std::polar(1.0, field_.k * x);
    return e * rp + rm / e;
  }

  void build() {
    const double ak = std::abs(field_.k);
    const double xs = stationary_point(opt_.N_max);
    Xc_ = opt_.core_radius > 0 ? opt_.core_radius : 2 * xs + 10.0 / ak;
    Xc_ *= opt_.core_scale;
    if (Xc_ < 1.5 * xs)
      throw numerical_error("theta_integral: stationary point at |x| = " + std::to_string(xs) +
                            " lies outside the core; use X_core >= " + std::to_string(2 * xs + 10.0 / ak));
    L_ = opt_.window > 0 ? opt_.window : std::max(4 * Xc_, 400.0 / ak);
    if (2 * L_ > op_->cov().x_max()) throw numerical_error("theta_integral: tail window beyond the tabulated change of variables");

    const auto& t = Mesh::reference_nodes();
    const auto& w = Mesh::reference_weights();
    // panel lengths chosen so that the phase changes by at most ~1.5 rad
    auto add_side = [&](double sgn) {
      double a = 0.0;
      const double end = 2 * L_;
      while (a < end) {
        const double dxi = 1.0 / op_->cov().phi(op_->xi_of_x(a));
        double h = 1.5 / (opt_.density * (opt_.N_max * dxi + ak));
        if (a < Xc_ && a + h > Xc_) h = Xc_ - a;
        if (a + h > end) h = end - a;
        for (int l = 0; l < Mesh::order; ++l) {
          const double y = a + 0.5 * h * (t[static_cast<std::size_t>(l)] + 1);
          const double x = sgn * y;
          const bool in_core = y < Xc_;
          const cplx psi = in_core ? field_.psi(x) : psi_osc(x);
          const double win = detail::smooth_step((y - L_) / L_);
          x_.push_back(x);
          xi_.push_back(op_->xi_of_x(x));
          f_.push_back(0.5 * h * w[static_cast<std::size_t>(l)] * win * zeta_amplitude(*op_, x) * psi);
          core_.push_back(in_core);
        }
        a += h;
      }
    };
    add_side(1.0);
    add_side(-1.0);
  }

  std::shared_ptr<const OperatorCoefficients> op_;
  EigenfunctionField field_;
  ThetaOptions opt_;
  Decomposition dec_;
  RLimits lim_;
  double Xc_ = 0.0, L_ = 0.0;
  std::vector<double> x_, xi_;
  std::vector<cplx> f_;
  std::vector<char> core_;
};

// Mellin transform of u given as g(a) = e^{a/2} u(e^a) on a uniform grid in
// a = ln t:  (Mu)(xi) = (2 pi)^{-1/2} int g(a) e^{-i xi a} da.
struct LogGridFunction {
  double a0 = 0.0;
  double da = 0.0;
  std::vector<cplx> g;

  double a(std::size_t j) const { return a0 + da * double(j); }

  cplx mellin(double xi) const {
    cplx s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += g[j] * std::polar(1.0, -xi * a(j));
    return s * da / std::sqrt(2 * std::numbers::pi);
  }
  // (Fu)(xi) = e^{-i eta(xi)} (Mu)(-xi)
  cplx F(double xi) const { return std::polar(1.0, -eta_phase(xi)) * mellin(-xi); }

  double norm2() const {
    double s = 0.0;
    for (const cplx& v : g) s += std::norm(v);
    return s * da;
  }
};

// u(t) = t^{-1/2 + i xi0} exp(-(ln t - c)^2 / (2 sigma^2)) on a grid wide
// enough that the gaussian is below 1e-18 at the ends.
inline LogGridFunction log_gaussian(double xi0, double sigma = 1.0, double center = 0.0, double da = 0.02) {
  if (!(sigma > 0) || !(da > 0)) throw validation_error("log_gaussian: sigma and da must be positive");
  const double half = 9.5 * sigma;
  LogGridFunction u;
  const auto m = static_cast<std::size_t>(std::ceil(2 * half / da));
  u.a0 = center - half;
  u.da = 2 * half / double(m);
  for (std::size_t j = 0; j <= m; ++j) {
    const double a = u.a(j);
    u.g.push_back(std::polar(std::exp(-(a - center) * (a - center) / (2 * sigma * sigma)), xi0 * a));
  }
  return u;
}

inline std::vector<cplx> mellin_F(const LogGridFunction& u, const std::vector<double>& xi) {
  std::vector<cplx> out;
  out.reserve(xi.size());
  for (double s : xi) out.push_back(u.F(s));
  return out;
}

struct QuadraticFormResult {
  cplx hankel_side = 0.0;  // (Hu, u)
  cplx symbol_side = 0.0;  // (A Fu, Fu)
  double residual = 0.0;
  double norm_u = 0.0, norm_Fu = 0.0;
};

namespace detail {
template <class F>
cplx gauss_panels(const F& f, double lo, double hi, int panels) {
  using G = boost::math::quadrature::gauss<double, 20>;
  const double h = (hi - lo) / panels;
  cplx s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h;
    s += G::integrate([&](double x) { return f(x); }, a, a + h);
  }
  return s;
}
}  // namespace detail

// Compares (Hu,u), a 2-D quadrature in a = ln t, b = ln s with
//   h(e^a + e^b) e^{(a+b)/2} = P(ln(e^a + e^b)) / (2 cosh((a-b)/2)),
// against (A Fu, Fu) with A = v Q(D) v and D = -i d/dxi taken numerically.
inline QuadraticFormResult quadratic_form_check(const LogGridFunction& u, const RealPolynomial& P,
                                                double deriv_step = 0.05) {
  const RealPolynomial Q = p_to_q(P);
  const int n = Q.degree();
  if (n > 4) throw validation_error("quadratic_form_check: degree above 4 not supported");
  const WeightProfile v = WeightProfile::hankel();
  if (u.g.size() < 16 || std::abs(u.g.front()) > 1e-12 || std::abs(u.g.back()) > 1e-12)
    throw numerical_error("quadratic_form_check: test function does not decay on its grid");
  QuadraticFormResult r;
  cplx hs = 0.0;
  for (std::size_t i = 0; i < u.g.size(); ++i) {
    const double a = u.a(i);
    cplx row = 0.0;
    for (std::size_t j = 0; j < u.g.size(); ++j) {
      const double b = u.a(j);
      const double L = std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
      row += P(L) / (2 * std::cosh(0.5 * (a - b))) * std::conj(u.g[j]);
    }
    hs += row * u.g[i];
  }
  r.hankel_side = hs * u.da * u.da;

  // Fu is concentrated around minus the carrier frequency, with width
  // set by the spread of |g|^2 in a.
  double xi0 = 0.0, wsum = 0.0, mean = 0.0, second = 0.0;
  for (std::size_t j = 1; j < u.g.size(); ++j) {
    const double wt = std::norm(u.g[j]);
    xi0 += std::arg(u.g[j] * std::conj(u.g[j - 1])) / u.da * wt;
    mean += u.a(j) * wt;
    second += u.a(j) * u.a(j) * wt;
    wsum += wt;
  }
  xi0 /= wsum;
  mean /= wsum;
  const double spread = std::sqrt(2 * (second / wsum - mean * mean));
  const double width = 10.0 / spread;
  const double c = -xi0;
  auto vF = [&](double s) { return v(s) * u.F(s); };
  auto integrand = [&](double s) {
    cplx acc = Q[0] * vF(s);
    for (int m = 1; m <= n; ++m)
      acc += Q[m] * std::pow(cplx(0, -1), m) * detail::numerical_derivative(vF, s, m, deriv_step);
    return std::conj(u.F(s)) * v(s) * acc;
  };
  r.symbol_side = detail::gauss_panels(integrand, c - width, c + width, 40);
  r.norm_u = std::sqrt(u.norm2());
  r.norm_Fu = std::sqrt(detail::gauss_panels([&](double s) { return cplx(std::norm(u.F(s))); }, c - width, c + width, 40).real());
  r.residual = std::abs(r.hankel_side - r.symbol_side) / std::abs(r.symbol_side);
  return r;
}

}  // namespace carleman
