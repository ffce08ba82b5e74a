#pragma once
// Free resolvent of D^n, Lippmann-Schwinger solves for short-range
// operators B = D^n + sum_{m<n} b_m(x) D^m, and the scattering matrix.
//
// The unknown of the discrete problem is w = V psi.  With
//   psi = e^{ikx} - R_0(k^n + i0) w
// the equation reads w + V R_0 w = V e^{ikx}.  R_0 w is applied in O(N)
// operations per root by forward and backward sweeps over panels, and the
// system is solved by matrix-free GMRES.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/IterativeSolvers>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include "carleman/errors.hpp"
#include "carleman/liouville.hpp"
#include "carleman/specfun.hpp"

namespace carleman {

// Roots of zeta^n = z.  For real z the limit z + side*i0 decides the half
// plane of each real root; such roots are tagged in `real_root`.
struct RootSet {
  cplx z;
  int n = 0;
  std::vector<cplx> roots;       // counterclockwise from arg(z)/n
  std::vector<int> half;         // +1 upper, -1 lower
  std::vector<bool> real_root;

  int count_upper() const { return static_cast<int>(std::count(half.begin(), half.end(), 1)); }
  int count_strict_upper() const {
    int c = 0;
    for (std::size_t j = 0; j < roots.size(); ++j) c += (half[j] > 0 && !real_root[j]);
    return c;
  }
};

inline RootSet zeta_roots(cplx z, int n, int side = +1) {
  if (n < 1) throw validation_error("zeta_roots: n must be positive");
  if (z == 0.0) throw domain_error("zeta_roots: z = 0 is a degenerate spectral point");
  RootSet r;
  r.z = z;
  r.n = n;
  const bool on_axis = z.imag() == 0.0;
  const double mod = std::pow(std::abs(z), 1.0 / n);
  double base = std::arg(z);
  if (base < 0) base += 2 * std::numbers::pi;
  for (int j = 0; j < n; ++j) {
    const double a = (base + 2 * std::numbers::pi * j) / n;
    cplx zeta = std::polar(mod, a);
    bool is_real = false;
    if (on_axis && std::abs(zeta.imag()) < 1e-13 * mod) {
      zeta = cplx(zeta.real(), 0.0);
      is_real = true;
    }
    int h;
    if (is_real) {
      // z + i side eps moves the root by i side eps / (n zeta^{n-1})
      h = (side * std::pow(zeta.real(), n - 1) > 0) ? 1 : -1;
    } else {
      h = zeta.imag() > 0 ? 1 : -1;
    }
    r.roots.push_back(zeta);
    r.half.push_back(h);
    r.real_root.push_back(is_real);
  }
  return r;
}

// Upper bound on the multiplicity of an eigenvalue of sign sign_lambda:
// the number of non-real roots of zeta^n = lambda in the upper half plane.
inline int eigenvalue_multiplicity_bound(int n, int sign_lambda) {
  if (n < 1) throw validation_error("eigenvalue_multiplicity_bound: n must be positive");
  if (sign_lambda == 0) throw domain_error("eigenvalue_multiplicity_bound: lambda = 0");
  return zeta_roots(cplx(sign_lambda > 0 ? 1.0 : -1.0, 0.0), n).count_strict_upper();
}

// Kernel of D_x^p (D^n - z)^{-1}; for real z the side selects z +- i0.
// The two one-sided formulas agree at x = y for p <= n - 2.
inline cplx free_resolvent_kernel(double x, double y, cplx z, int n, int p = 0, int side = +1) {
  const RootSet rs = zeta_roots(z, n, side);
  const int want = x >= y ? 1 : -1;
  cplx s = 0.0;
  for (std::size_t j = 0; j < rs.roots.size(); ++j)
    if (rs.half[j] == want) s += double(want) * std::pow(rs.roots[j], 1 - n + p) * std::exp(cplx(0, 1) * rs.roots[j] * (x - y));
  return cplx(0, 1.0 / n) * s;
}

// Coefficients b_0..b_{n-1} of V as functions of x.  Breakpoints are points
// where some coefficient is not smooth; mesh panels never straddle them.
struct CoefficientField {
  int n = 0;
  std::function<std::vector<cplx>(double)> eval;
  std::vector<double> breakpoints;
  bool even = false;  // b_m(-x) = (-1)^m conj b_m(x) style symmetry of an even weight
};

// Gauged coefficients b~_m of an operator built from Q and v.
inline CoefficientField gauged_field(std::shared_ptr<const OperatorCoefficients> op) {
  CoefficientField f;
  f.n = op->n();
  f.eval = [op](double x) {
    std::vector<cplx> b = op->b_tilde(x);
    b.pop_back();
    return b;
  };
  f.even = true;
  return f;
}

inline CoefficientField scaled(CoefficientField f, double eps) {
  auto inner = f.eval;
  f.eval = [inner, eps](double x) {
    std::vector<cplx> b = inner(x);
    for (auto& c : b) c *= eps;
    return b;
  };
  return f;
}

struct MeshOptions {
  double X = 1e4;       // truncation radius
  double h_min = 0.25;  // panel length at the origin
  double h_max = 1.5;   // cap on panel length, further limited by 2/|k|
  double growth = 1.1;
};

// Panels of Gauss-Legendre nodes on [-X, X], symmetric about 0.
struct Mesh {
  static constexpr int order = 10;
  std::vector<double> edges;
  std::vector<double> nodes;
  std::vector<double> weights;
  double X = 0.0;
  double h_max = 0.0;

  std::size_t panels() const { return edges.size() - 1; }
  std::size_t size() const { return nodes.size(); }

  static const std::array<double, order>& reference_nodes() {
    static const std::array<double, order> t = [] {
      std::array<double, order> out{};
      const auto& a = boost::math::quadrature::gauss<double, order>::abscissa();
      for (int i = 0; i < order / 2; ++i) {
        out[static_cast<std::size_t>(order / 2 - 1 - i)] = -a[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(order / 2 + i)] = a[static_cast<std::size_t>(i)];
      }
      return out;
    }();
    return t;
  }
  static const std::array<double, order>& reference_weights() {
    static const std::array<double, order> w = [] {
      std::array<double, order> out{};
      const auto& a = boost::math::quadrature::gauss<double, order>::weights();
      for (int i = 0; i < order / 2; ++i) {
        out[static_cast<std::size_t>(order / 2 - 1 - i)] = a[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(order / 2 + i)] = a[static_cast<std::size_t>(i)];
      }
      return out;
    }();
    return w;
  }

  std::size_t panel_of(double x) const {
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::size_t j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - edges.begin() - 1));
    return std::min(j, panels() - 1);
  }
};

inline Mesh make_mesh(const MeshOptions& opt, double k_abs, const std::vector<double>& breakpoints = {}) {
  if (!(opt.X > 0) || !(opt.h_min > 0) || !(opt.growth >= 1.0)) throw validation_error("make_mesh: bad options");
  Mesh m;
  m.X = opt.X;
  m.h_max = std::min(opt.h_max, k_abs > 0 ? 2.0 / k_abs : opt.h_max);
  std::vector<double> right{0.0};
  double h = std::min(opt.h_min, m.h_max);
  while (right.back() < opt.X) {
    double next = right.back() + h;
    if (next > opt.X - 0.25 * h) next = opt.X;
    right.push_back(next);
    h = std::min(h * opt.growth, m.h_max);
  }
  for (auto it = right.rbegin(); it != right.rend(); ++it)
    if (*it > 0) m.edges.push_back(-*it);
  m.edges.insert(m.edges.end(), right.begin(), right.end());
  for (double b : breakpoints)
    if (std::abs(b) < opt.X) m.edges.push_back(b);
  std::sort(m.edges.begin(), m.edges.end());
  m.edges.erase(std::unique(m.edges.begin(), m.edges.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                m.edges.end());
  const auto& t = Mesh::reference_nodes();
  const auto& w = Mesh::reference_weights();
  for (std::size_t j = 0; j + 1 < m.edges.size(); ++j) {
    const double a = m.edges[j], hh = m.edges[j + 1] - a;
    for (int i = 0; i < Mesh::order; ++i) {
      m.nodes.push_back(a + 0.5 * hh * (1 + t[static_cast<std::size_t>(i)]));
      m.weights.push_back(0.5 * hh * w[static_cast<std::size_t>(i)]);
    }
  }
  return m;
}

namespace detail {

// Lagrange basis on the reference nodes evaluated at s in [-1, 1].
inline std::array<double, Mesh::order> lagrange_basis(double s) {
  const auto& t = Mesh::reference_nodes();
  std::array<double, Mesh::order> L{};
  for (int l = 0; l < Mesh::order; ++l) {
    double v = 1.0;
    for (int j = 0; j < Mesh::order; ++j)
      if (j != l) v *= (s - t[static_cast<std::size_t>(j)]) / (t[static_cast<std::size_t>(l)] - t[static_cast<std::size_t>(j)]);
    L[static_cast<std::size_t>(l)] = v;
  }
  return L;
}

// Exact integrals of e^{i zeta (x - y)} against the Lagrange interpolant of
// w on one panel of length h, in panel coordinates.
struct PanelKernel {
  static constexpr int p = Mesh::order;
  std::array<std::array<cplx, p>, p> fwd{};  // int_a^{x_i}
  std::array<cplx, p> fwd_full{};            // int_a^b, evaluated at x = b
  std::array<cplx, p> fwd_shift{};           // e^{i zeta (x_i - a)}
  cplx fwd_step;                             // e^{i zeta h}
  std::array<std::array<cplx, p>, p> bwd{};  // int_{x_i}^b
  std::array<cplx, p> bwd_full{};            // int_a^b, evaluated at x = a
  std::array<cplx, p> bwd_shift{};           // e^{i zeta (x_i - b)}
  cplx bwd_step;                             // e^{-i zeta h}

  PanelKernel(cplx zeta, double h) {
    using G = boost::math::quadrature::gauss<double, 30>;
    const auto& t = Mesh::reference_nodes();
    const cplx I(0, 1);
    auto integrate = [&](double lo, double hi, double xe) {
      // int_lo^hi e^{i zeta (xe - y)} L_l(y) dy in panel coordinates y in [0, h]
      std::array<cplx, p> acc{};
      const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
      if (half <= 0) return acc;
      const auto& a = G::abscissa();
      const auto& w = G::weights();
      for (std::size_t q = 0; q < a.size(); ++q) {
        for (int sgn : {-1, 1}) {
          if (a[q] == 0 && sgn < 0) continue;
          const double y = mid + sgn * half * a[q];
          const cplx e = std::exp(I * zeta * (xe - y)) * (w[q] * half);
          const auto L = lagrange_basis(2 * y / h - 1);
          for (int l = 0; l < p; ++l) acc[static_cast<std::size_t>(l)] += e * L[static_cast<std::size_t>(l)];
        }
      }
      return acc;
    };
    for (int i = 0; i < p; ++i) {
      const double xi = 0.5 * h * (1 + t[static_cast<std::size_t>(i)]);
      fwd[static_cast<std::size_t>(i)] = integrate(0.0, xi, xi);
      bwd[static_cast<std::size_t>(i)] = integrate(xi, h, xi);
      fwd_shift[static_cast<std::size_t>(i)] = std::exp(I * zeta * xi);
      bwd_shift[static_cast<std::size_t>(i)] = std::exp(I * zeta * (xi - h));
    }
    fwd_full = integrate(0.0, h, h);
    bwd_full = integrate(0.0, h, 0.0);
    fwd_step = std::exp(I * zeta * h);
    bwd_step = std::exp(-I * zeta * h);
  }
};

// Sweeps for one root on one mesh.  Panel kernels are shared between
// panels of equal length.
class RootSweep {
 public:
  RootSweep(const Mesh& mesh, cplx zeta) : mesh_(&mesh), zeta_(zeta) {
    std::map<long long, std::size_t> seen;
    for (std::size_t j = 0; j < mesh.panels(); ++j) {
      const double h = mesh.edges[j + 1] - mesh.edges[j];
      const long long key = std::llround(h * 1e12);
      auto it = seen.find(key);
      if (it == seen.end()) {
        it = seen.emplace(key, kernels_.size()).first;
        kernels_.emplace_back(zeta, h);
      }
      index_.push_back(it->second);
    }
  }

  cplx zeta() const { return zeta_; }

  // out_i = int_{-X}^{x_i} e^{i zeta (x_i - y)} w(y) dy
  template <class In, class Out>
  void forward(const In& w, Out& out) const {
    constexpr int p = Mesh::order;
    cplx edge = 0.0;
    for (std::size_t j = 0; j < mesh_->panels(); ++j) {
      const PanelKernel& K = kernels_[index_[j]];
      const std::size_t o = j * p;
      for (int i = 0; i < p; ++i) {
        cplx s = K.fwd_shift[static_cast<std::size_t>(i)] * edge;
        for (int l = 0; l < p; ++l) s += K.fwd[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] * cplx(w[static_cast<Eigen::Index>(o + static_cast<std::size_t>(l))]);
        out[static_cast<Eigen::Index>(o + static_cast<std::size_t>(i))] = s;
      }
      cplx e = K.fwd_step * edge;
      for (int l = 0; l < p; ++l) e += K.fwd_full[static_cast<std::size_t>(l)] * cplx(w[static_cast<Eigen::Index>(o + static_cast<std::size_t>(l))]);
      edge = e;
    }
  }

  // out_i = int_{x_i}^{X} e^{i zeta (x_i - y)} w(y) dy
  template <class In, class Out>
  void backward(const In& w, Out& out) const {
    constexpr int p = Mesh::order;
    cplx edge = 0.0;
    for (std::size_t jj = mesh_->panels(); jj-- > 0;) {
      const PanelKernel& K = kernels_[index_[jj]];
      const std::size_t o = jj * p;
      for (int i = 0; i < p; ++i) {
        cplx s = K.bwd_shift[static_cast<std::size_t>(i)] * edge;
        for (int l = 0; l < p; ++l) s += K.bwd[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] * cplx(w[static_cast<Eigen::Index>(o + static_cast<std::size_t>(l))]);
        out[static_cast<Eigen::Index>(o + static_cast<std::size_t>(i))] = s;
      }
      cplx e = K.bwd_step * edge;
      for (int l = 0; l < p; ++l) e += K.bwd_full[static_cast<std::size_t>(l)] * cplx(w[static_cast<Eigen::Index>(o + static_cast<std::size_t>(l))]);
      edge = e;
    }
  }

 private:
  const Mesh* mesh_;
  cplx zeta_;
  std::vector<PanelKernel> kernels_;
  std::vector<std::size_t> index_;
};

using CVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

// Applies D^p R_0(k^n + i0) to w at the mesh nodes for p = 0..p_max.
class FreeResolvent {
 public:
  FreeResolvent(const Mesh& mesh, double k, int n) : mesh_(&mesh), n_(n) {
    roots_ = zeta_roots(cplx(std::pow(k, n), 0.0), n, +1);
    for (cplx z : roots_.roots) sweeps_.emplace_back(mesh, z);
  }

  const RootSet& roots() const { return roots_; }
  const RootSweep& sweep(std::size_t j) const { return sweeps_[j]; }

  // partial[j] = one-sided integral for root j (forward if upper, backward if lower)
  std::vector<CVector> partials(const CVector& w) const {
    std::vector<CVector> out(sweeps_.size(), CVector(w.size()));
    for (std::size_t j = 0; j < sweeps_.size(); ++j) {
      if (roots_.half[j] > 0) sweeps_[j].forward(w, out[j]);
      else sweeps_[j].backward(w, out[j]);
    }
    return out;
  }

  // (D^p R_0 w)(x_i) from the partial integrals
  CVector apply(const std::vector<CVector>& parts, int p) const {
    CVector out = CVector::Zero(parts.empty() ? 0 : parts[0].size());
    for (std::size_t j = 0; j < sweeps_.size(); ++j) {
      const cplx c = cplx(0, 1.0 / n_) * double(roots_.half[j]) * std::pow(roots_.roots[j], 1 - n_ + p);
      out += c * parts[j];
    }
    return out;
  }

 private:
  const Mesh* mesh_;
  int n_;
  RootSet roots_;
  std::vector<RootSweep> sweeps_;
};

}  // namespace detail

// Coefficients b_m tabulated at the nodes of one mesh.
struct TabulatedCoefficients {
  int n = 0;
  std::vector<detail::CVector> b;  // b[m](i)

  TabulatedCoefficients(const CoefficientField& f, const Mesh& mesh) : n(f.n) {
    b.assign(static_cast<std::size_t>(n), detail::CVector::Zero(static_cast<Eigen::Index>(mesh.size())));
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      const std::vector<cplx> c = f.eval(mesh.nodes[i]);
      for (int m = 0; m < n && m < static_cast<int>(c.size()); ++m) b[static_cast<std::size_t>(m)](static_cast<Eigen::Index>(i)) = c[static_cast<std::size_t>(m)];
    }
  }
};

namespace detail {
class LsOperator;
}  // namespace detail
}  // namespace carleman

namespace Eigen::internal {
template <>
struct traits<carleman::detail::LsOperator> : public traits<Eigen::SparseMatrix<std::complex<double>>> {};
}  // namespace Eigen::internal

namespace carleman::detail {

// I + V R_0 as an Eigen operator for GMRES.
class LsOperator : public Eigen::EigenBase<LsOperator> {
 public:
  using Scalar = cplx;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  LsOperator(const FreeResolvent& r0, const TabulatedCoefficients& tab) : r0_(&r0), tab_(&tab) {}

  Eigen::Index rows() const { return tab_->b.empty() ? 0 : tab_->b[0].size(); }
  Eigen::Index cols() const { return rows(); }

  template <class Rhs>
  Eigen::Product<LsOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<LsOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  CVector apply(const CVector& w) const {
    CVector out = w;
    const auto parts = r0_->partials(w);
    for (int m = 0; m < tab_->n; ++m) out += tab_->b[static_cast<std::size_t>(m)].cwiseProduct(r0_->apply(parts, m));
    return out;
  }

 private:
  const FreeResolvent* r0_;
  const TabulatedCoefficients* tab_;
};

}  // namespace carleman::detail

namespace Eigen::internal {
template <class Rhs>
struct generic_product_impl<carleman::detail::LsOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<carleman::detail::LsOperator, Rhs,
                                generic_product_impl<carleman::detail::LsOperator, Rhs>> {
  using Scalar = typename Product<carleman::detail::LsOperator, Rhs>::Scalar;
  template <class Dest>
  static void scaleAndAddTo(Dest& dst, const carleman::detail::LsOperator& lhs, const Rhs& rhs, const Scalar& alpha) {
    dst += alpha * lhs.apply(rhs);
  }
};
}  // namespace Eigen::internal

namespace carleman {

struct SolverOptions {
  MeshOptions mesh;
  double gmres_tol = 1e-11;
  int gmres_restart = 40;
  int gmres_max_iter = 400;
};

// Solution of the Lippmann-Schwinger equation for psi = psi_- at one k.
struct EigenfunctionField {
  int n = 0;
  double k = 0.0;
  std::shared_ptr<const Mesh> mesh;
  detail::CVector w;                   // V psi at the nodes
  std::vector<detail::CVector> dpsi;   // D^p psi, p = 0..n-1
  double residual = 0.0;               // relative residual of the discrete equation
  int iterations = 0;
  RootSet roots;

  // psi at an arbitrary point by panel interpolation
  cplx psi(double x, int p = 0) const {
    const std::size_t j = mesh->panel_of(x);
    const double a = mesh->edges[j], b = mesh->edges[j + 1];
    const auto L = detail::lagrange_basis(2 * (x - a) / (b - a) - 1);
    cplx s = 0.0;
    for (int l = 0; l < Mesh::order; ++l) s += L[static_cast<std::size_t>(l)] * dpsi[static_cast<std::size_t>(p)](static_cast<Eigen::Index>(j * Mesh::order + static_cast<std::size_t>(l)));
    return s;
  }
};

inline EigenfunctionField solve_lippmann_schwinger(const CoefficientField& coeffs, double k, const Mesh& mesh_in,
                                                   const SolverOptions& opt = {},
                                                   const TabulatedCoefficients* tab_in = nullptr) {
  const int n = coeffs.n;
  if (k == 0.0) throw domain_error("solve_lippmann_schwinger: lambda = 0");
  EigenfunctionField f;
  f.n = n;
  f.k = k;
  f.mesh = std::make_shared<const Mesh>(mesh_in);
  const Mesh& mesh = *f.mesh;
  std::optional<TabulatedCoefficients> own;
  if (!tab_in) own.emplace(coeffs, mesh);
  const TabulatedCoefficients& tab = tab_in ? *tab_in : *own;

  const detail::FreeResolvent r0(mesh, k, n);
  f.roots = r0.roots();
  const auto N = static_cast<Eigen::Index>(mesh.size());
  detail::CVector plane(N);
  for (Eigen::Index i = 0; i < N; ++i) plane(i) = std::exp(cplx(0, k * mesh.nodes[static_cast<std::size_t>(i)]));
  detail::CVector rhs = detail::CVector::Zero(N);
  for (int m = 0; m < n; ++m) rhs += std::pow(k, m) * tab.b[static_cast<std::size_t>(m)].cwiseProduct(plane);

  const detail::LsOperator A(r0, tab);
  if (rhs.norm() == 0.0) {
    f.w = detail::CVector::Zero(N);
  } else {
    Eigen::GMRES<detail::LsOperator, Eigen::IdentityPreconditioner> gmres;
    gmres.setTolerance(opt.gmres_tol);
    gmres.set_restart(opt.gmres_restart);
    gmres.setMaxIterations(opt.gmres_max_iter);
    gmres.compute(A);
    f.w = gmres.solve(rhs);
    f.iterations = static_cast<int>(gmres.iterations());
    if (gmres.info() != Eigen::Success)
      throw near_exceptional_error("solve_lippmann_schwinger: GMRES did not converge; lambda is close to an exceptional point");
    f.residual = (A.apply(f.w) - rhs).norm() / rhs.norm();
  }
  const auto parts = r0.partials(f.w);
  for (int p = 0; p < n; ++p) {
    detail::CVector d = std::pow(k, p) * plane;
    if (f.w.size() > 0) d -= r0.apply(parts, p);
    f.dpsi.push_back(std::move(d));
  }
  return f;
}

// Limits of r (odd n) and r_+, r_- (even n) at the ends of the mesh.
struct RLimits {
  cplx r_plus_minus_inf = 1.0, r_plus_plus_inf = 1.0;    // r_+ or r
  cplx r_minus_minus_inf = 0.0, r_minus_plus_inf = 0.0;  // r_- (even n)
};

inline RLimits r_functions(const EigenfunctionField& f) {
  const int n = f.n;
  const double k = f.k;
  const Mesh& m = *f.mesh;
  cplx Im = 0.0, Ip = 0.0;  // int e^{-iky} w, int e^{iky} w
  for (std::size_t i = 0; i < m.size(); ++i) {
    const cplx e = std::exp(cplx(0, -k * m.nodes[i]));
    const cplx wi = f.w(static_cast<Eigen::Index>(i)) * m.weights[i];
    Im += e * wi;
    Ip += wi / e;
  }
  const cplx c = cplx(0, 1.0 / n) * std::pow(k, 1 - n);
  RLimits r;
  if (n % 2 == 1) {
    r.r_plus_minus_inf = 1.0;
    r.r_plus_plus_inf = 1.0 - c * Im;
  } else if (k > 0) {
    r.r_plus_minus_inf = 1.0;
    r.r_plus_plus_inf = 1.0 - c * Im;
    r.r_minus_plus_inf = 0.0;
    r.r_minus_minus_inf = -c * Ip;
  } else {
    r.r_plus_plus_inf = 1.0;
    r.r_plus_minus_inf = 1.0 + c * Im;
    r.r_minus_minus_inf = 0.0;
    r.r_minus_plus_inf = c * Ip;
  }
  return r;
}

// psi_osc and psi_dec at the nodes.  psi_osc = e^{ikx} r_+ + e^{-ikx} r_-
// collects the real roots, psi_dec the others.
struct Decomposition {
  detail::CVector psi_osc, psi_dec;
  detail::CVector r_plus, r_minus;  // r (odd n) is r_plus
};

inline Decomposition decompose(const EigenfunctionField& f) {
  const int n = f.n;
  const Mesh& m = *f.mesh;
  const detail::FreeResolvent r0(m, f.k, n);
  const auto parts = r0.partials(f.w);
  const auto N = static_cast<Eigen::Index>(m.size());
  Decomposition d;
  d.psi_osc = detail::CVector::Zero(N);
  d.psi_dec = detail::CVector::Zero(N);
  d.r_plus = detail::CVector::Zero(N);
  d.r_minus = detail::CVector::Zero(N);
  const RootSet& rs = r0.roots();
  for (std::size_t j = 0; j < rs.roots.size(); ++j) {
    const cplx c = cplx(0, 1.0 / n) * double(rs.half[j]) * std::pow(rs.roots[j], 1 - n);
    const detail::CVector term = -c * parts[j];
    if (!rs.real_root[j]) {
      d.psi_dec += term;
      continue;
    }
    const bool same = rs.roots[j].real() * f.k > 0;
    for (Eigen::Index i = 0; i < N; ++i) {
      const cplx e = std::exp(cplx(0, rs.roots[j].real() * m.nodes[static_cast<std::size_t>(i)]));
      (same ? d.r_plus : d.r_minus)(i) += term(i) / e;
    }
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    const cplx e = std::exp(cplx(0, f.k * m.nodes[static_cast<std::size_t>(i)]));
    d.r_plus(i) += 1.0;
    d.psi_osc(i) = e * d.r_plus(i) + d.r_minus(i) / e;
  }
  return d;
}

// One-term Born approximation psi_0 - R_0 V psi_0 at the nodes.
inline detail::CVector born_approximation(const CoefficientField& coeffs, double k, const Mesh& mesh) {
  const int n = coeffs.n;
  const TabulatedCoefficients tab(coeffs, mesh);
  const detail::FreeResolvent r0(mesh, k, n);
  const auto N = static_cast<Eigen::Index>(mesh.size());
  detail::CVector plane(N), v = detail::CVector::Zero(N);
  for (Eigen::Index i = 0; i < N; ++i) plane(i) = std::exp(cplx(0, k * mesh.nodes[static_cast<std::size_t>(i)]));
  for (int m = 0; m < n; ++m) v += std::pow(k, m) * tab.b[static_cast<std::size_t>(m)].cwiseProduct(plane);
  return plane - r0.apply(r0.partials(v), 0);
}

// Scattering matrix at one lambda: scalar s for odd n, 2x2 S for even n.
struct ScatteringEntry {
  double lambda = 0.0;
  int n = 0;
  Eigen::Matrix2cd S = Eigen::Matrix2cd::Identity();  // odd n: S(0,0) = s
  double unitarity_defect = 0.0;
  double truncation_X = 0.0;
  std::size_t mesh_nodes = 0;
  int iterations = 0;

  cplx s() const { return S(0, 0); }
  double reciprocity_defect() const { return n % 2 == 0 ? std::abs(S(0, 1) - S(1, 0)) : 0.0; }
};

inline double unitarity_defect(const Eigen::Matrix2cd& S, int n) {
  if (n % 2 == 1) return std::abs(std::abs(S(0, 0)) - 1.0);
  return (S.adjoint() * S - Eigen::Matrix2cd::Identity()).norm();
}

// Scattering data at one truncation radius.  For even n both k = +-lambda^{1/n}
// are solved; tabulated coefficients may be shared between calls.
class ScatteringSolver {
 public:
  ScatteringSolver(CoefficientField coeffs, SolverOptions opt = {}) : coeffs_(std::move(coeffs)), opt_(opt) {}

  const CoefficientField& coefficients() const { return coeffs_; }
  const SolverOptions& options() const { return opt_; }

  EigenfunctionField field(double k, double X) {
    MeshOptions mo = opt_.mesh;
    mo.X = X;
    const Mesh mesh = make_mesh(mo, std::abs(k), coeffs_.breakpoints);
    const TabulatedCoefficients& tab = table(mesh);
    return solve_lippmann_schwinger(coeffs_, k, mesh, opt_, &tab);
  }

  ScatteringEntry entry(double lambda, double X) {
    const int n = coeffs_.n;
    if (lambda == 0.0) throw domain_error("scattering_matrix: lambda = 0");
    if (n % 2 == 0 && lambda < 0) throw domain_error("scattering_matrix: no propagating solution for lambda < 0 and even n");
    ScatteringEntry e;
    e.lambda = lambda;
    e.n = n;
    e.truncation_X = X;
    const double k = std::copysign(std::pow(std::abs(lambda), 1.0 / n), lambda);
    if (n % 2 == 1) {
      const EigenfunctionField f = field(k, X);
      e.S(0, 0) = r_functions(f).r_plus_plus_inf;
      e.S(0, 1) = e.S(1, 0) = 0.0;
      e.S(1, 1) = 1.0;
      e.mesh_nodes = f.mesh->size();
      e.iterations = f.iterations;
    } else {
      const EigenfunctionField fp = field(k, X);
      const EigenfunctionField fm = field(-k, X);
      const RLimits rp = r_functions(fp), rm = r_functions(fm);
      e.S(0, 0) = rp.r_plus_plus_inf;
      e.S(1, 0) = rp.r_minus_minus_inf;
      e.S(0, 1) = rm.r_minus_plus_inf;
      e.S(1, 1) = rm.r_plus_minus_inf;
      e.mesh_nodes = fp.mesh->size();
      e.iterations = std::max(fp.iterations, fm.iterations);
    }
    e.unitarity_defect = unitarity_defect(e.S, n);
    return e;
  }

 private:
  const TabulatedCoefficients& table(const Mesh& mesh) {
    for (auto& [edges, tab] : cache_)
      if (edges == mesh.edges) return *tab;
    if (cache_.size() > 4) cache_.erase(cache_.begin());
    cache_.emplace_back(mesh.edges, std::make_unique<TabulatedCoefficients>(coeffs_, mesh));
    return *cache_.back().second;
  }

  CoefficientField coeffs_;
  SolverOptions opt_;
  std::vector<std::pair<std::vector<double>, std::unique_ptr<TabulatedCoefficients>>> cache_;
};

// S at X and 2X.  The first-order tail error is removed by extrapolation
// in 1/X; the X-to-2X difference is the recorded truncation estimate.
struct ScatteringRecord {
  ScatteringEntry at_X, at_2X;
  Eigen::Matrix2cd S_extrapolated;
  double truncation_estimate = 0.0;
};

inline ScatteringRecord scattering_matrix(ScatteringSolver& solver, double lambda, double X) {
  ScatteringRecord r;
  r.at_X = solver.entry(lambda, X);
  r.at_2X = solver.entry(lambda, 2 * X);
  r.S_extrapolated = 2.0 * r.at_2X.S - r.at_X.S;
  r.truncation_estimate = (r.at_2X.S - r.at_X.S).norm();
  return r;
}

// Second-order cross-check by shooting: -psi'' + b_0 psi = k^2 psi on
// [-X, X] with a pure outgoing wave imposed at the far end.
struct ShootingResult {
  cplx transmission;  // s11 for k > 0, s22 for k < 0
  cplx reflection;    // s21 for k > 0, s12 for k < 0
};

inline ShootingResult ode_cross_check(const std::function<double(double)>& b0, double k, double X,
                                      const std::vector<double>& breakpoints = {}, double tol = 1e-11) {
  if (k == 0.0) throw domain_error("ode_cross_check: k = 0");
  using State = std::array<double, 4>;
  namespace ode = boost::numeric::odeint;
  double seg_lo = 0.0, seg_hi = 0.0;
  auto rhs = [&](const State& s, State& ds, double x) {
    // one-sided coefficient values at the ends of a segment
    const double nudge = 1e-9 * std::max(1.0, std::abs(x));
    const double xe = std::clamp(x, seg_lo + nudge, seg_hi - nudge);
    const double q = b0(xe) - k * k;
    ds[0] = s[2];
    ds[1] = s[3];
    ds[2] = q * s[0];
    ds[3] = q * s[1];
  };
  // march from the side the wave leaves through
  const double start = k > 0 ? X : -X, stop = -start;
  std::vector<double> stops;
  for (double b : breakpoints)
    if (std::abs(b) < X) stops.push_back(b);
  std::sort(stops.begin(), stops.end());
  if (k > 0) std::reverse(stops.begin(), stops.end());
  stops.push_back(stop);
  const cplx e0 = std::exp(cplx(0, k * start));
  const cplx de0 = cplx(0, k) * e0;
  State s{e0.real(), e0.imag(), de0.real(), de0.imag()};
  auto stepper = ode::make_controlled<ode::runge_kutta_fehlberg78<State>>(tol, tol);
  double x = start;
  for (double target : stops) {
    seg_lo = std::min(x, target);
    seg_hi = std::max(x, target);
    const double dt = (target - x) * 1e-3;
    std::size_t steps = ode::integrate_adaptive(stepper, rhs, s, x, target, dt);
    if (steps > 50'000'000) throw numerical_error("ode_cross_check: integration too stiff");
    x = target;
  }
  const cplx psi(s[0], s[1]), dpsi(s[2], s[3]);
  const cplx A = 0.5 * (psi + dpsi / cplx(0, k)) * std::exp(cplx(0, -k * stop));
  const cplx B = 0.5 * (psi - dpsi / cplx(0, k)) * std::exp(cplx(0, k * stop));
  return {1.0 / A, B / A};
}

}  // namespace carleman
