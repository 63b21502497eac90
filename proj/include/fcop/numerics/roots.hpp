#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "fcop/error.hpp"

namespace fcop {

struct RootOptions {
  double f_tol = 1e-10;  // on |F(x) - p|, scaled by min(p, 1-p) when relative_tail is set
  bool relative_tail = true;
  int max_iterations = 300;
};

struct Bracket {
  double lo;
  double hi;
};

namespace detail {

template <class F>
Bracket expand_bracket(F& cdf, double p, Bracket b) {
  if (!(b.lo < b.hi)) throw BracketError("invert_monotone_cdf: empty bracket");
  double width = b.hi - b.lo;
  int doublings = 0;
  while (cdf(b.lo) > p) {
    if (++doublings > 60) throw BracketError("invert_monotone_cdf: lower bracket expansion failed");
    b.hi = b.lo;
    b.lo -= width;
    width *= 2.0;
  }
  width = b.hi - b.lo;
  doublings = 0;
  while (cdf(b.hi) < p) {
    if (++doublings > 60) throw BracketError("invert_monotone_cdf: upper bracket expansion failed");
    b.lo = b.hi;
    b.hi += width;
    width *= 2.0;
  }
  return b;
}

}  // namespace detail

// Solves F(x) = p for nondecreasing F by Newton steps safeguarded with bisection.
// Passing a density pdf enables Newton; otherwise a regula-falsi (Illinois) step is used.
template <class F, class Pdf>
double invert_monotone_cdf(F&& cdf, Pdf&& pdf, double p, Bracket bracket, double start,
                           const RootOptions& opt = {}) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("invert_monotone_cdf: p must lie in (0,1)");
  Bracket b = detail::expand_bracket(cdf, p, bracket);
  const double tol = opt.relative_tail ? opt.f_tol * std::min(p, 1.0 - p) : opt.f_tol;
  double x = (start > b.lo && start < b.hi) ? start : 0.5 * (b.lo + b.hi);
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double r = cdf(x) - p;
    if (std::abs(r) <= tol) return x;
    if (r < 0.0)
      b.lo = x;
    else
      b.hi = x;
    const double d = pdf(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - r / d : std::numeric_limits<double>::quiet_NaN();
    if (!(next > b.lo && next < b.hi)) next = 0.5 * (b.lo + b.hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      return next;
    if (b.hi - b.lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      return 0.5 * (b.lo + b.hi);
    x = next;
  }
  return x;
}

template <class F>
double invert_monotone_cdf(F&& cdf, double p, Bracket bracket, const RootOptions& opt = {}) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("invert_monotone_cdf: p must lie in (0,1)");
  Bracket b = detail::expand_bracket(cdf, p, bracket);
  const double tol = opt.relative_tail ? opt.f_tol * std::min(p, 1.0 - p) : opt.f_tol;
  double flo = cdf(b.lo) - p;
  double fhi = cdf(b.hi) - p;
  int side = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    double x = (flo != fhi) ? (b.lo * fhi - b.hi * flo) / (fhi - flo) : 0.5 * (b.lo + b.hi);
    if (!(x > b.lo && x < b.hi)) x = 0.5 * (b.lo + b.hi);
    const double r = cdf(x) - p;
    if (std::abs(r) <= tol) return x;
    if (b.hi - b.lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return x;
    if (r < 0.0) {
      b.lo = x;
      flo = r;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      b.hi = x;
      fhi = r;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  return 0.5 * (b.lo + b.hi);
}

}  // namespace fcop
