#pragma once
#include <array>
#include <cmath>

namespace kummer {

// Truncated Taylor series f(x0 + t) = sum c[k] t^k, k <= N. Exact derivative
// propagation through the elementary operations used by the radial profiles.
template <int N>
struct Jet {
  std::array<double, N + 1> c{};

  Jet() = default;
  Jet(double v) { c[0] = v; }

  static Jet variable(double x0) {
    Jet j(x0);
    if constexpr (N >= 1) j.c[1] = 1.0;
    return j;
  }

  double value() const { return c[0]; }

  double derivative(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c[k] * f;
  }

  Jet operator-() const {
    Jet r;
    for (int k = 0; k <= N; ++k) r.c[k] = -c[k];
    return r;
  }
  Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= N; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= N; ++k) c[k] -= o.c[k];
    return *this;
  }
};

template <int N> Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <int N> Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <int N> Jet<N> operator+(Jet<N> a, double b) { a.c[0] += b; return a; }
template <int N> Jet<N> operator+(double b, Jet<N> a) { a.c[0] += b; return a; }
template <int N> Jet<N> operator-(Jet<N> a, double b) { a.c[0] -= b; return a; }
template <int N> Jet<N> operator-(double b, const Jet<N>& a) { return -a + b; }

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (int k = 0; k <= N; ++k)
    for (int j = 0; j <= k; ++j) r.c[k] += a.c[j] * b.c[k - j];
  return r;
}
template <int N> Jet<N> operator*(Jet<N> a, double s) { for (auto& v : a.c) v *= s; return a; }
template <int N> Jet<N> operator*(double s, Jet<N> a) { return a * s; }

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> q;
  for (int k = 0; k <= N; ++k) {
    double v = a.c[k];
    for (int j = 1; j <= k; ++j) v -= b.c[j] * q.c[k - j];
    q.c[k] = v / b.c[0];
  }
  return q;
}
template <int N> Jet<N> operator/(Jet<N> a, double s) { for (auto& v : a.c) v /= s; return a; }
template <int N> Jet<N> operator/(double s, const Jet<N>& b) { return Jet<N>(s) / b; }

template <int N>
Jet<N> sqrt(const Jet<N>& a) {
  Jet<N> s;
  s.c[0] = std::sqrt(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    double v = a.c[k];
    for (int j = 1; j < k; ++j) v -= s.c[j] * s.c[k - j];
    s.c[k] = v / (2.0 * s.c[0]);
  }
  return s;
}

namespace detail {
// log-series recursion given the value of log(a) and a itself.
template <int N>
Jet<N> log_tail(double l0, const Jet<N>& a) {
  Jet<N> l;
  l.c[0] = l0;
  for (int k = 1; k <= N; ++k) {
    double v = a.c[k];
    for (int j = 1; j < k; ++j) v -= (double(j) / k) * l.c[j] * a.c[k - j];
    l.c[k] = v / a.c[0];
  }
  return l;
}
}  // namespace detail

template <int N>
Jet<N> log(const Jet<N>& a) {
  return detail::log_tail(std::log(a.c[0]), a);
}

// log(1 + x) keeping full relative accuracy of the value when x is small.
template <int N>
Jet<N> log1p(const Jet<N>& x) {
  return detail::log_tail(std::log1p(x.c[0]), x + 1.0);
}

template <int N>
Jet<N> exp(const Jet<N>& a) {
  Jet<N> e;
  e.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= N; ++k)
    for (int j = 1; j <= k; ++j) e.c[k] += (double(j) / k) * a.c[j] * e.c[k - j];
  return e;
}

}  // namespace kummer
