#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fcop/error.hpp"

namespace fcop {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 200;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1)
      throw ConfigError("QuadratureConfig: tolerances must be positive and max_subdivisions >= 1");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

namespace detail {

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  int kind;  // 0 finite, 1 [a,inf), 2 (-inf,b], 3 (-inf,inf)
  double anchor;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// Maps the unit-interval variable of a segment back to x and returns dx/ds.
inline double map_point(int kind, double anchor, double s, double& jac) {
  switch (kind) {
    case 1: {
      const double r = 1.0 / (1.0 - s);
      jac = r * r;
      return anchor + s * r;
    }
    case 2: {
      const double r = 1.0 / (1.0 - s);
      jac = r * r;
      return anchor - s * r;
    }
    case 3: {
      const double den = 1.0 - s * s;
      jac = (1.0 + s * s) / (den * den);
      return s / den;
    }
    default:
      jac = 1.0;
      return s;
  }
}

template <class F>
void gk21(F& f, Segment& seg) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  using G = boost::math::quadrature::gauss<double, 10>;
  static const auto& xk = GK::abscissa();
  static const auto& wk = GK::weights();
  static const auto& wg = G::weights();
  const double c = 0.5 * (seg.lo + seg.hi);
  const double h = 0.5 * (seg.hi - seg.lo);
  auto eval = [&](double s) {
    double jac = 1.0;
    const double x = map_point(seg.kind, seg.anchor, s, jac);
    const double y = f(x) * jac;
    if (!std::isfinite(y)) throw QuadratureError(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity());
    return y;
  };
  const double f0 = eval(c);
  double kron = f0 * wk[0];
  double gauss = 0.0;
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double fs = eval(c + h * xk[i]) + eval(c - h * xk[i]);
    kron += wk[i] * fs;
    if (i % 2 == 1) gauss += wg[i / 2] * fs;
  }
  seg.value = kron * h;
  seg.error = std::abs((kron - gauss) * h);
}

}  // namespace detail

// Adaptive Gauss-Kronrod (10/21) integration over [a,b]; a and b may be infinite.
// Interior breakpoints split the range so kinks fall on segment boundaries.
template <class F>
QuadratureResult integrate_real_line(F&& f, double a, double b, const QuadratureConfig& cfg = {},
                                     std::span<const double> breakpoints = {}) {
  cfg.validate();
  if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate_real_line: NaN limit");
  if (a == b) return {};
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> cuts;
  cuts.push_back(a);
  for (double p : breakpoints)
    if (std::isfinite(p) && p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<detail::Segment> heap;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    detail::Segment seg{};
    if (std::isinf(lo) && std::isinf(hi)) {
      seg = {-1.0, 1.0, 0, 0, 3, 0.0};
    } else if (std::isinf(hi)) {
      seg = {0.0, 1.0, 0, 0, 1, lo};
    } else if (std::isinf(lo)) {
      seg = {0.0, 1.0, 0, 0, 2, hi};
    } else {
      seg = {lo, hi, 0, 0, 0, 0.0};
    }
    detail::gk21(f, seg);
    total += seg.value;
    total_err += seg.error;
    heap.push(seg);
  }
  int subdivisions = 0;
  while (total_err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
    if (subdivisions >= cfg.max_subdivisions) throw QuadratureError(sign * total, total_err);
    detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) throw QuadratureError(sign * total, total_err);
    detail::Segment left = worst;
    detail::Segment right = worst;
    left.hi = mid;
    right.lo = mid;
    detail::gk21(f, left);
    detail::gk21(f, right);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
    if (total_err < 0.0) {
      // Recompute from scratch to shed accumulated cancellation.
      total = 0.0;
      total_err = 0.0;
      auto copy = heap;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }
  // Final sum over segments in a fixed order for determinism.
  std::vector<detail::Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const detail::Segment& x, const detail::Segment& y) {
    return x.kind != y.kind ? x.kind < y.kind : x.lo < y.lo;
  });
  double sum = 0.0;
  double err = 0.0;
  for (const auto& s : segs) {
    sum += s.value;
    err += s.error;
  }
  return {sign * sum, err, subdivisions};
}

// As integrate_real_line, with a cubic change of variable on the two finite pieces adjacent to
// `singular`, which tames algebraic singularities and cusps located there.
template <class F>
QuadratureResult integrate_with_singular_point(F&& f, double a, double b, double singular, const QuadratureConfig& cfg,
                                               std::span<const double> breakpoints = {}) {
  if (!(singular >= a && singular <= b) || !std::isfinite(singular))
    return integrate_real_line(f, a, b, cfg, breakpoints);
  double left = a;
  double right = b;
  for (double p : breakpoints) {
    if (p < singular && p > left) left = p;
    if (p > singular && p < right) right = p;
  }
  const double ll = singular - left;
  const double lr = right - singular;
  auto g = [&](double x) {
    if (x < singular && std::isfinite(ll) && x > left) {
      const double t = (singular - x) / ll;
      return 3.0 * t * t * f(singular - ll * t * t * t);
    }
    if (x > singular && std::isfinite(lr) && x < right) {
      const double t = (x - singular) / lr;
      return 3.0 * t * t * f(singular + lr * t * t * t);
    }
    return f(x);
  };
  std::vector<double> bp(breakpoints.begin(), breakpoints.end());
  bp.push_back(singular);
  return integrate_real_line(g, a, b, cfg, bp);
}

}  // namespace fcop
