#pragma once
// Liouville transform of A = v Q(D) v into B = sum_m b_m(x) D^m, and the
// gauge e^{i beta(x)} that removes the D^{n-1} term.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <vector>

#include "carleman/coeffmap.hpp"
#include "carleman/errors.hpp"
#include "carleman/profile.hpp"
#include "carleman/series.hpp"

namespace carleman {

// d^j/dxi^j f(x(xi)) = sum_l tau_{j,l}(xi) f^{(l)}(x(xi)), where each tau_{j,l}
// is an integer combination of products phi^{(k1)} ... phi^{(kl)} with
// phi = x'.  A monomial is keyed by its sorted derivative orders.
class TauTable {
 public:
  using Monomial = std::vector<int>;
  using Poly = std::map<Monomial, long long>;

  explicit TauTable(int j_max) : j_max_(j_max) {
    if (j_max < 0 || j_max > 10) throw validation_error("tau_table: j_max must be in [0, 10]");
    tau_.assign(static_cast<std::size_t>(j_max) + 1, std::vector<Poly>(static_cast<std::size_t>(j_max) + 1));
    tau_[0][0][{}] = 1;
    if (j_max >= 1) tau_[1][1][{0}] = 1;
    for (int j = 1; j < j_max; ++j) {
      for (int l = 1; l <= j + 1; ++l) {
        Poly next;
        if (l <= j) add(next, differentiate(at(j, l)));
        if (l >= 2) add(next, times_phi(at(j, l - 1)));
        tau_[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(l)] = std::move(next);
      }
    }
  }

  int j_max() const { return j_max_; }
  const Poly& at(int j, int l) const { return tau_[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)]; }

  // dphi[k] = phi^{(k)}
  double evaluate(int j, int l, const std::vector<double>& dphi) const {
    double s = 0.0;
    for (const auto& [mono, c] : at(j, l)) {
      double t = static_cast<double>(c);
      for (int k : mono) t *= dphi[static_cast<std::size_t>(k)];
      s += t;
    }
    return s;
  }

 private:
  static void add(Poly& a, const Poly& b) {
    for (const auto& [m, c] : b) {
      a[m] += c;
      if (a[m] == 0) a.erase(m);
    }
  }
  static Poly differentiate(const Poly& p) {
    Poly r;
    for (const auto& [mono, c] : p) {
      for (std::size_t i = 0; i < mono.size(); ++i) {
        Monomial m = mono;
        ++m[i];
        std::sort(m.begin(), m.end());
        r[m] += c;
      }
    }
    return r;
  }
  static Poly times_phi(const Poly& p) {
    Poly r;
    for (const auto& [mono, c] : p) {
      Monomial m = mono;
      m.insert(m.begin(), 0);
      r[m] += c;
    }
    return r;
  }

  int j_max_;
  std::vector<std::vector<Poly>> tau_;
};

inline TauTable tau_table(int j_max) { return TauTable(j_max); }

// Coefficients b_m(x) of B = L* A L and b~_m(x) of the gauged operator
// e^{-i beta} B e^{i beta}, beta(x) = -q_{n-1} xi(x)/n.  For n = 0 the
// operator is multiplication by q_0 v^2 and x = xi.
class OperatorCoefficients {
 public:
  OperatorCoefficients(RealPolynomial Q, WeightProfile profile)
      : Q_(std::move(Q)), profile_(std::move(profile)), n_(Q_.degree()), tau_(std::max(n_, 0)) {
    if (n_ < 0) throw validation_error("OperatorCoefficients: empty symbol");
    if (n_ > 10) throw validation_error("OperatorCoefficients: order above 10 not supported");
    if (std::abs(Q_.leading() - 1.0) > 1e-14) throw validation_error("OperatorCoefficients: Q must be monic");
    if (n_ >= 1) cov_ = std::make_shared<ChangeOfVariables>(profile_, n_);
  }

  int n() const { return n_; }
  const RealPolynomial& Q() const { return Q_; }
  const WeightProfile& profile() const { return profile_; }
  const ChangeOfVariables& cov() const { return *cov_; }
  const TauTable& tau() const { return tau_; }

  double xi_of_x(double x) const { return n_ == 0 ? x : cov_->xi_of_x(x); }
  double qn1() const { return n_ >= 1 ? Q_[n_ - 1] : 0.0; }

  std::vector<cplx> b(double x) const {
    if (n_ == 0) return {cplx(Q_[0] * std::exp(2 * profile_.log_v(x)))};
    return b_at_xi(cov_->xi_of_x(x));
  }

  // b_0..b_n at the point x(xi).  All terms carry the common factor
  // v^{2 - 2l/n}, which is applied last so that no large intermediate
  // products appear for large |xi|.
  std::vector<cplx> b_at_xi(double xi) const {
    const int n = n_;
    const double lv = profile_.log_v(xi);
    const std::vector<double> dphi = normalized(xi, -2.0 / n, n);
    const std::vector<double> dpsi = normalized(xi, 1.0 - 1.0 / n, n);
    std::vector<cplx> out(static_cast<std::size_t>(n) + 1);
    for (int l = 0; l <= n; ++l) {
      cplx s = 0.0;
      for (int m = l; m <= n; ++m) {
        double inner = 0.0;
        for (int j = l; j <= m; ++j) {
          const double t = (j == 0) ? 1.0 : tau_.evaluate(j, l, dphi);
          inner += detail::binomial(m, j) * dpsi[static_cast<std::size_t>(m - j)] * t;
        }
        s += Q_[m] * ipow(l - m) * inner;
      }
      out[static_cast<std::size_t>(l)] = s * std::exp((2.0 - 2.0 * l / n) * lv);
    }
    out[static_cast<std::size_t>(n)] = 1.0;
    return out;
  }

  double beta(double x) const { return n_ == 0 ? 0.0 : -qn1() * cov_->xi_of_x(x) / n_; }

  // G_p = e^{-i beta} D^p e^{i beta}, p = 0..n, D = -i d/dx
  std::vector<cplx> gauge_factors(double x) const {
    const int n = n_;
    std::vector<cplx> G(static_cast<std::size_t>(n) + 1, 0.0);
    G[0] = 1.0;
    if (n == 0 || qn1() == 0.0) return G;
    const double xi0 = cov_->xi_of_x(x);
    // x(xi0 + s) - x0 as a series in s, then s(h) by reversion
    const Series<double> X = cov_->phi_series(xi0, n).integrate();
    const Series<double> s = revert(X);
    Series<cplx> e(n);
    for (int p = 1; p <= n; ++p) e[p] = cplx(0.0, -qn1() / n * s[p]);
    const Series<cplx> E = exp(e);
    double fact = 1.0;
    for (int p = 1; p <= n; ++p) {
      fact *= p;
      G[static_cast<std::size_t>(p)] = ipow(-p) * fact * E[p];
    }
    return G;
  }

  std::vector<cplx> b_tilde(double x) const {
    const std::vector<cplx> bb = b(x);
    if (n_ == 0) return bb;
    return gauge(bb, gauge_factors(x));
  }

  // b~_j = sum_{m>=j} C(m, j) b_m G_{m-j}
  static std::vector<cplx> gauge(const std::vector<cplx>& bb, const std::vector<cplx>& G) {
    const int n = static_cast<int>(bb.size()) - 1;
    std::vector<cplx> out(bb.size(), 0.0);
    for (int j = 0; j <= n; ++j)
      for (int m = j; m <= n; ++m)
        out[static_cast<std::size_t>(j)] += detail::binomial(m, j) * bb[static_cast<std::size_t>(m)] * G[static_cast<std::size_t>(m - j)];
    if (n >= 1) out[static_cast<std::size_t>(n)] = 1.0;
    return out;
  }

 private:
  static cplx ipow(int k) {
    static const cplx pw[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    return pw[((k % 4) + 4) % 4];
  }

  // f^{(k)}/f for f = v^s, k = 0..order
  std::vector<double> normalized(double xi, double s, int order) const {
    Series<double> lg = s * profile_.log_v(xi, order);
    lg[0] = 0.0;
    const Series<double> e = exp(lg);
    std::vector<double> d(static_cast<std::size_t>(order) + 1);
    for (int k = 0; k <= order; ++k) d[static_cast<std::size_t>(k)] = e.derivative(k);
    return d;
  }

  RealPolynomial Q_;
  WeightProfile profile_;
  int n_;
  TauTable tau_;
  std::shared_ptr<ChangeOfVariables> cov_;
};

inline std::vector<cplx> b_coefficients(const OperatorCoefficients& op, double x) { return op.b(x); }
inline std::vector<cplx> gauged_coefficients(const OperatorCoefficients& op, double x) { return op.b_tilde(x); }
inline double gauge_beta(const OperatorCoefficients& op, double x) { return op.beta(x); }

namespace detail {

// m-th derivative of a smooth scalar function by central differences with
// three Richardson steps.
template <class F>
auto numerical_derivative(const F& f, double x, int m, double h) {
  using R = decltype(f(x));
  auto central = [&](double step) {
    R acc = R(0);
    for (int k = 0; k <= m; ++k) {
      const double w = ((k % 2) ? -1.0 : 1.0) * binomial(m, k);
      acc += w * f(x + (0.5 * m - k) * step);
    }
    return acc / std::pow(step, m);
  };
  // Richardson table on steps h, h/2, h/4, h/8; the error is even in h.
  R t[4];
  for (int i = 0; i < 4; ++i) t[i] = central(h / double(1 << i));
  double f4 = 4.0;
  for (int level = 1; level < 4; ++level, f4 *= 4.0)
    for (int i = 3; i >= level; --i) t[i] = (f4 * t[i] - t[i - 1]) / (f4 - 1.0);
  return t[3];
}

}  // namespace detail

// Smooth test function on the x-line: returns f, f', ..., f^(order) at x.
using TestFunction = std::function<std::vector<cplx>(double x, int order)>;

// Residual of the identity
//   v sum_m q_m D_xi^m (v^{1-1/n} f(x(xi))) = v^{-1/n} sum_m b_m D_x^m f
// at x(xi), with the left side from numerical xi-derivatives.
inline double operator_apply_check(const OperatorCoefficients& op, const TestFunction& f,
                                   const std::vector<double>& x_grid, double h = 0.06) {
  const int n = op.n();
  double worst = 0.0;
  for (double x : x_grid) {
    const double xi = op.xi_of_x(x);
    auto g = [&](double s) {
      const double xs = n == 0 ? s : op.cov().x_of_xi(s);
      const double psi = std::exp((n == 0 ? 1.0 : 1.0 - 1.0 / n) * op.profile().log_v(s));
      return psi * f(xs, 0)[0];
    };
    cplx lhs = 0.0;
    for (int m = 0; m <= n; ++m) {
      const cplx dm = m == 0 ? g(xi) : detail::numerical_derivative(g, xi, m, h);
      lhs += op.Q()[m] * std::pow(cplx(0, -1), m) * dm;
    }
    lhs *= op.profile()(xi);
    const std::vector<cplx> b = op.b(x);
    const std::vector<cplx> fd = f(x, n);
    cplx rhs = 0.0;
    for (int m = 0; m <= n; ++m) rhs += b[static_cast<std::size_t>(m)] * std::pow(cplx(0, -1), m) * fd[static_cast<std::size_t>(m)];
    rhs *= std::exp((n == 0 ? 0.0 : -1.0 / n) * op.profile().log_v(xi));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

struct DecayFit {
  int m = 0;
  int p = 0;
  double slope = 0.0;
  double expected = 0.0;  // -(n-m) gamma - p gamma (1 + delta n / 2)
};

// Log-log slopes of |b_m^{(p)}(x)| on x in [x_lo, x_hi], p = 0..p_max.
inline std::vector<DecayFit> decay_report(const OperatorCoefficients& op, const DecayParameters& dp,
                                          int p_max = 1, double x_lo = 10.0, double x_hi = 1e4,
                                          bool gauged = false) {
  const int n = op.n();
  const int samples = 31;
  std::vector<DecayFit> out;
  for (int m = 0; m < n; ++m) {
    for (int p = 0; p <= p_max; ++p) {
      std::vector<double> lx, lb;
      for (int i = 0; i < samples; ++i) {
        const double x = x_lo * std::pow(x_hi / x_lo, double(i) / (samples - 1));
        auto bm = [&](double y) { return gauged ? op.b_tilde(y)[static_cast<std::size_t>(m)] : op.b(y)[static_cast<std::size_t>(m)]; };
        const cplx val = p == 0 ? bm(x) : detail::numerical_derivative(bm, x, p, 0.05 * x);
        lx.push_back(std::log(x));
        lb.push_back(std::log(std::abs(val)));
      }
      DecayFit f;
      f.m = m;
      f.p = p;
      f.slope = detail::fit_slope(lx, lb);
      f.expected = -(n - m) * dp.gamma - p * dp.gamma * (1 + dp.delta * n / 2.0);
      out.push_back(f);
    }
  }
  return out;
}

}  // namespace carleman
