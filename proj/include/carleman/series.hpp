#pragma once
// Truncated power series in one variable h, stored as Taylor coefficients
// c[j] = f^(j)(x0) / j!.  All operations truncate at the order of the left
// operand; mixing orders is a logic error.

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace carleman {

template <class T>
class Series {
 public:
  Series() = default;
  explicit Series(int order, T c0 = T(0)) : c_(static_cast<std::size_t>(order) + 1, T(0)) { c_[0] = c0; }

  // x0 + h
  static Series variable(int order, T x0) {
    Series s(order, x0);
    if (order >= 1) s.c_[1] = T(1);
    return s;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  T& operator[](int j) { return c_[static_cast<std::size_t>(j)]; }
  const T& operator[](int j) const { return c_[static_cast<std::size_t>(j)]; }
  const std::vector<T>& coeffs() const { return c_; }

  // j-th derivative at the expansion point
  T derivative(int j) const {
    T f = c_[static_cast<std::size_t>(j)];
    for (int i = 2; i <= j; ++i) f *= T(i);
    return f;
  }

  template <class U>
  U eval(U h) const {
    U acc(0);
    for (int j = order(); j >= 0; --j) acc = acc * h + U(c_[static_cast<std::size_t>(j)]);
    return acc;
  }

  Series& operator+=(const Series& o) { for (int j = 0; j <= order(); ++j) c_[j] += o[j]; return *this; }
  Series& operator-=(const Series& o) { for (int j = 0; j <= order(); ++j) c_[j] -= o[j]; return *this; }
  Series& operator*=(T a) { for (auto& x : c_) x *= a; return *this; }
  Series& operator+=(T a) { c_[0] += a; return *this; }
  Series& operator-=(T a) { c_[0] -= a; return *this; }

  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator+(Series a, T b) { return a += b; }
  friend Series operator-(Series a, T b) { return a -= b; }
  friend Series operator+(T b, Series a) { return a += b; }
  friend Series operator-(T b, const Series& a) { return Series(a.order(), b) - a; }
  friend Series operator*(Series a, T b) { return a *= b; }
  friend Series operator*(T b, Series a) { return a *= b; }
  friend Series operator-(Series a) { return a *= T(-1); }

  friend Series operator*(const Series& a, const Series& b) {
    const int K = a.order();
    Series r(K);
    for (int i = 0; i <= K; ++i) {
      if (a[i] == T(0)) continue;
      for (int j = 0; i + j <= K; ++j) r[i + j] += a[i] * b[j];
    }
    return r;
  }

  friend Series operator/(const Series& a, const Series& b) {
    const int K = a.order();
    Series r(K);
    for (int k = 0; k <= K; ++k) {
      T s = a[k];
      for (int j = 1; j <= k; ++j) s -= b[j] * r[k - j];
      r[k] = s / b[0];
    }
    return r;
  }

  // d/dh, keeping the order (top coefficient becomes 0)
  Series differentiate() const {
    Series r(order());
    for (int j = 1; j <= order(); ++j) r[j - 1] = T(j) * c_[j];
    return r;
  }

  // antiderivative vanishing at h = 0; the top coefficient is dropped
  Series integrate() const {
    Series r(order());
    for (int j = 1; j <= order(); ++j) r[j] = c_[j - 1] / T(j);
    return r;
  }

 private:
  std::vector<T> c_;
};

template <class T>
Series<T> exp(const Series<T>& a) {
  using std::exp;
  const int K = a.order();
  Series<T> r(K, exp(a[0]));
  for (int k = 1; k <= K; ++k) {
    T s(0);
    for (int j = 1; j <= k; ++j) s += T(j) * a[j] * r[k - j];
    r[k] = s / T(k);
  }
  return r;
}

template <class T>
Series<T> log(const Series<T>& a) {
  using std::log;
  const int K = a.order();
  Series<T> r(K, log(a[0]));
  for (int k = 1; k <= K; ++k) {
    T s = a[k];
    for (int j = 1; j < k; ++j) s -= T(j) * r[j] * a[k - j] / T(k);
    r[k] = s / a[0];
  }
  return r;
}

// a^p for a[0] != 0, via the J.C.P. Miller recurrence
template <class T, class P>
Series<T> pow(const Series<T>& a, P p) {
  using std::pow;
  const int K = a.order();
  Series<T> r(K, pow(a[0], p));
  for (int k = 1; k <= K; ++k) {
    T s(0);
    for (int j = 1; j <= k; ++j) s += (T(p) * T(j) - T(k - j)) * a[j] * r[k - j];
    r[k] = s / (T(k) * a[0]);
  }
  return r;
}

template <class T>
Series<T> sqrt(const Series<T>& a) { return pow(a, 0.5); }

// f(g(h)) where g[0] = 0 and f is expanded about 0
template <class T>
Series<T> compose(const Series<T>& f, const Series<T>& g) {
  assert(g[0] == T(0));
  const int K = g.order();
  Series<T> r(K, f[f.order()]);
  for (int j = f.order() - 1; j >= 0; --j) {
    r = r * g;
    r[0] += f[j];
  }
  return r;
}

// Series s with g(s(h)) = h, for g[0] = 0 and g[1] != 0.
template <class T>
Series<T> revert(const Series<T>& g) {
  const int K = g.order();
  Series<T> s(K), h = Series<T>::variable(K, T(0));
  if (K >= 1) s[1] = T(1) / g[1];
  Series<T> dg = g.differentiate();
  // Newton iteration doubles the number of correct terms each sweep.
  for (int correct = 2; correct / 2 <= K; correct *= 2) {
    Series<T> resid = compose(g, s) - h;
    s = s - resid / compose(dg, s);
  }
  return s;
}

}  // namespace carleman
