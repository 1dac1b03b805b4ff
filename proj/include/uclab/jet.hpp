#pragma once

// Second-order forward-mode jets. A closed-form profile written as a generic
// callable is evaluated on Jet<N> arguments to obtain exact first and second
// partial derivatives.

#include <array>
#include <cmath>

namespace uclab {

template <int N>
struct Jet {
  double v = 0.0;
  std::array<double, N> d{};
  std::array<std::array<double, N>, N> dd{};

  constexpr Jet() = default;
  constexpr Jet(double value) : v(value) {}  // NOLINT: implicit constants

  static Jet variable(double value, int index) {
    Jet j(value);
    j.d[index] = 1.0;
    return j;
  }
};

namespace detail {

// Applies a scalar function with value g0, slope g1 and curvature g2 at x.v.
template <int N>
Jet<N> chain(const Jet<N>& x, double g0, double g1, double g2) {
  Jet<N> r(g0);
  for (int i = 0; i < N; ++i) r.d[i] = g1 * x.d[i];
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) r.dd[i][k] = g1 * x.dd[i][k] + g2 * x.d[i] * x.d[k];
  return r;
}

}  // namespace detail

template <int N>
Jet<N> operator+(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r(a.v + b.v);
  for (int i = 0; i < N; ++i) {
    r.d[i] = a.d[i] + b.d[i];
    for (int k = 0; k < N; ++k) r.dd[i][k] = a.dd[i][k] + b.dd[i][k];
  }
  return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a) {
  Jet<N> r(-a.v);
  for (int i = 0; i < N; ++i) {
    r.d[i] = -a.d[i];
    for (int k = 0; k < N; ++k) r.dd[i][k] = -a.dd[i][k];
  }
  return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a, const Jet<N>& b) {
  return a + (-b);
}

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r(a.v * b.v);
  for (int i = 0; i < N; ++i) {
    r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    for (int k = 0; k < N; ++k)
      r.dd[i][k] = a.dd[i][k] * b.v + a.v * b.dd[i][k] + a.d[i] * b.d[k] + a.d[k] * b.d[i];
  }
  return r;
}

template <int N>
Jet<N> reciprocal(const Jet<N>& a) {
  const double inv = 1.0 / a.v;
  return detail::chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  return a * reciprocal(b);
}

template <int N> Jet<N> operator+(const Jet<N>& a, double b) { return a + Jet<N>(b); }
template <int N> Jet<N> operator+(double a, const Jet<N>& b) { return Jet<N>(a) + b; }
template <int N> Jet<N> operator-(const Jet<N>& a, double b) { return a - Jet<N>(b); }
template <int N> Jet<N> operator-(double a, const Jet<N>& b) { return Jet<N>(a) - b; }
template <int N> Jet<N> operator/(const Jet<N>& a, double b) { return a * Jet<N>(1.0 / b); }
template <int N> Jet<N> operator/(double a, const Jet<N>& b) { return Jet<N>(a) * reciprocal(b); }

template <int N>
Jet<N> operator*(const Jet<N>& a, double b) {
  Jet<N> r(a.v * b);
  for (int i = 0; i < N; ++i) {
    r.d[i] = a.d[i] * b;
    for (int k = 0; k < N; ++k) r.dd[i][k] = a.dd[i][k] * b;
  }
  return r;
}

template <int N> Jet<N> operator*(double a, const Jet<N>& b) { return b * a; }

template <int N>
Jet<N> exp(const Jet<N>& x) {
  const double e = std::exp(x.v);
  return detail::chain(x, e, e, e);
}

template <int N>
Jet<N> log(const Jet<N>& x) {
  return detail::chain(x, std::log(x.v), 1.0 / x.v, -1.0 / (x.v * x.v));
}

template <int N>
Jet<N> sqrt(const Jet<N>& x) {
  const double s = std::sqrt(x.v);
  return detail::chain(x, s, 0.5 / s, -0.25 / (s * x.v));
}

template <int N>
Jet<N> pow(const Jet<N>& x, double e) {
  const double p = std::pow(x.v, e);
  return detail::chain(x, p, e * p / x.v, e * (e - 1.0) * p / (x.v * x.v));
}

template <int N>
Jet<N> sin(const Jet<N>& x) {
  const double s = std::sin(x.v), c = std::cos(x.v);
  return detail::chain(x, s, c, -s);
}

template <int N>
Jet<N> cos(const Jet<N>& x) {
  const double s = std::sin(x.v), c = std::cos(x.v);
  return detail::chain(x, c, -s, -c);
}

template <int N>
Jet<N> tanh(const Jet<N>& x) {
  const double t = std::tanh(x.v);
  const double s = 1.0 - t * t;
  return detail::chain(x, t, s, -2.0 * t * s);
}

// |x| is smooth away from zero; at zero the one-sided derivative of +x is used.
template <int N>
Jet<N> abs(const Jet<N>& x) {
  return x.v < 0.0 ? -x : x;
}

// Scalar overloads so generic profiles compile for double as well as Jet.
using std::abs;
using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;
using std::tanh;

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Jet<N>& x) {
  return x.v;
}

}  // namespace uclab
