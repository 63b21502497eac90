#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "fcop/error.hpp"

namespace fcop {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2 = std::numbers::sqrt2;

inline double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

namespace detail {

// (1 - Phi(t)) / phi(t) for t >= 20 by continued fraction.
inline double upper_mills_ratio_cf(double t) {
  double f = t;
  double c = t;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = t + k * d;
    d = 1.0 / d;
    c = t + k / c;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace detail

// log(Phi(x) / phi(x)), finite for every finite x.
inline double log_mills(double x) {
  if (x < -20.0) return std::log(detail::upper_mills_ratio_cf(-x));
  return std::log(std_normal_cdf(x)) + 0.5 * x * x + kLogSqrt2Pi;
}

inline double log_std_normal_cdf(double x) {
  if (x < -20.0) return log_mills(x) - 0.5 * x * x - kLogSqrt2Pi;
  if (x > 0.0) return std::log1p(-std_normal_cdf(-x));
  return std::log(std_normal_cdf(x));
}

inline double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("std_normal_quantile: p must lie in (0,1)");
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace fcop
