#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include <boost/math/special_functions/digamma.hpp>

#include "fcop/numerics/normal.hpp"

namespace fcop {

// Forward-mode dual number carrying N partial derivatives.
template <std::size_t N>
struct Dual {
  double val = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double v) : val(v) {}  // NOLINT(google-explicit-constructor)

  static Dual variable(double v, std::size_t index) {
    Dual x(v);
    x.d[index] = 1.0;
    return x;
  }

  Dual& operator+=(const Dual& o) {
    val += o.val;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    val -= o.val;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.val + val * o.d[i];
    val *= o.val;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.val;
    const double q = val * inv;
    for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    val = q;
    return *this;
  }
};

template <std::size_t N>
Dual<N> operator-(Dual<N> a) {
  a.val = -a.val;
  for (auto& x : a.d) x = -x;
  return a;
}
template <std::size_t N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N>
Dual<N> operator+(Dual<N> a, double b) { a.val += b; return a; }
template <std::size_t N>
Dual<N> operator+(double a, Dual<N> b) { b.val += a; return b; }
template <std::size_t N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N>
Dual<N> operator-(Dual<N> a, double b) { a.val -= b; return a; }
template <std::size_t N>
Dual<N> operator-(double a, const Dual<N>& b) { return Dual<N>(a) -= b; }
template <std::size_t N>
Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N>
Dual<N> operator*(Dual<N> a, double b) {
  a.val *= b;
  for (auto& x : a.d) x *= b;
  return a;
}
template <std::size_t N>
Dual<N> operator*(double a, Dual<N> b) { return b * a; }
template <std::size_t N>
Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }
template <std::size_t N>
Dual<N> operator/(Dual<N> a, double b) { return a * (1.0 / b); }
template <std::size_t N>
Dual<N> operator/(double a, const Dual<N>& b) { return Dual<N>(a) /= b; }

template <std::size_t N>
bool operator<(const Dual<N>& a, const Dual<N>& b) { return a.val < b.val; }
template <std::size_t N>
bool operator>(const Dual<N>& a, const Dual<N>& b) { return a.val > b.val; }

inline double value_of(double x) { return x; }
template <std::size_t N>
double value_of(const Dual<N>& x) { return x.val; }

// Applies the chain rule for a scalar function with value f and derivative df at x.val.
template <std::size_t N>
Dual<N> chain(const Dual<N>& x, double f, double df) {
  Dual<N> r(f);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = df * x.d[i];
  return r;
}

template <std::size_t N>
Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.val);
  return chain(x, e, e);
}
template <std::size_t N>
Dual<N> log(const Dual<N>& x) { return chain(x, std::log(x.val), 1.0 / x.val); }
template <std::size_t N>
Dual<N> log1p(const Dual<N>& x) { return chain(x, std::log1p(x.val), 1.0 / (1.0 + x.val)); }
template <std::size_t N>
Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.val);
  return chain(x, s, 0.5 / s);
}
template <std::size_t N>
Dual<N> pow(const Dual<N>& x, double p) {
  const double v = std::pow(x.val, p);
  return chain(x, v, p * std::pow(x.val, p - 1.0));
}
template <std::size_t N>
Dual<N> lgamma(const Dual<N>& x) {
  return chain(x, std::lgamma(x.val), boost::math::digamma(x.val));
}

template <std::size_t N>
Dual<N> std_normal_cdf(const Dual<N>& x) {
  return chain(x, std_normal_cdf(x.val), std_normal_pdf(x.val));
}
template <std::size_t N>
Dual<N> log_mills(const Dual<N>& x) {
  const double lm = log_mills(x.val);
  return chain(x, lm, x.val + std::exp(-lm));
}
template <std::size_t N>
Dual<N> log_std_normal_cdf(const Dual<N>& x) {
  const double lc = log_std_normal_cdf(x.val);
  return chain(x, lc, std::exp(-0.5 * x.val * x.val - kLogSqrt2Pi - lc));
}

// log(exp(a) + exp(b)) without overflow.
template <class T>
T log_add_exp(const T& a, const T& b) {
  using std::exp;
  using std::log1p;
  if (value_of(a) >= value_of(b)) return a + log1p(exp(b - a));
  return b + log1p(exp(a - b));
}

}  // namespace fcop
