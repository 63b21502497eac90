#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "fcop/error.hpp"
#include "fcop/inference/optimize.hpp"
#include "fcop/numerics/dual.hpp"
#include "fcop/numerics/spd.hpp"

namespace fcop {

enum class MarginalKind { known_uniform, rank_nonparametric, parametric_student_t };

// Student-t margin with mean m, standard deviation sd and nu degrees of freedom.
struct MarginalModel {
  MarginalKind kind = MarginalKind::known_uniform;
  double m = 0.0;
  double sd = 1.0;
  double nu = 8.0;

  static MarginalModel student_t(double m, double sd, double nu) {
    return {MarginalKind::parametric_student_t, m, sd, nu};
  }

  void validate() const {
    if (kind != MarginalKind::parametric_student_t) return;
    if (!(sd > 0.0) || !(nu > 2.0) || !std::isfinite(m) || !std::isfinite(sd) || !std::isfinite(nu))
      throw DomainError("MarginalModel: Student-t margin needs sd > 0 and nu > 2");
  }
  // Scale of the standard t variable.
  double scale() const { return sd * std::sqrt((nu - 2.0) / nu); }
};

inline Matrix rank_transform(const Matrix& y) {
  const Eigen::Index n_rep = y.rows();
  if (n_rep < 2) throw ConfigError("rank_transform: need at least two replicates");
  Matrix u(n_rep, y.cols());
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_rep));
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return y(a, j) < y(b, j); });
    Eigen::Index i = 0;
    while (i < n_rep) {
      Eigen::Index k = i;
      while (k + 1 < n_rep && y(idx[k + 1], j) == y(idx[i], j)) ++k;
      // Average of ranks i+1..k+1.
      const double rank = 0.5 * static_cast<double>(i + k) + 1.0;
      for (Eigen::Index t = i; t <= k; ++t) u(idx[t], j) = (rank - 0.5) / static_cast<double>(n_rep);
      i = k + 1;
    }
  }
  return u;
}

inline double student_t_log_pdf(double y, const MarginalModel& g) {
  const double s = g.scale();
  const double t = (y - g.m) / s;
  const double nu = g.nu;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI) -
         0.5 * (nu + 1.0) * std::log1p(t * t / nu) - std::log(s);
}

inline double student_t_cdf(double y, const MarginalModel& g) {
  const boost::math::students_t_distribution<double> dist(g.nu);
  const double t = (y - g.m) / g.scale();
  return t < 0.0 ? boost::math::cdf(dist, t) : boost::math::cdf(boost::math::complement(dist, -t));
}

inline double student_t_quantile(double u, const MarginalModel& g) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("student_t_quantile: u must lie in (0,1)");
  const boost::math::students_t_distribution<double> dist(g.nu);
  return g.m + g.scale() * boost::math::quantile(dist, u);
}

inline Matrix parametric_transform(const Matrix& y, const MarginalModel& g) {
  if (g.kind != MarginalKind::parametric_student_t) throw ConfigError("parametric_transform: needs a Student-t margin");
  g.validate();
  Matrix u(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y(i))) throw DomainError("parametric_transform: non-finite observation");
    u(i) = student_t_cdf(y(i), g);
    if (!(u(i) > 0.0 && u(i) < 1.0)) throw NumericError("parametric_transform: uniform score hit the boundary");
  }
  return u;
}

inline double student_t_log_likelihood(const Matrix& y, const MarginalModel& g) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += student_t_log_pdf(y(i), g);
  return s;
}

// Gradient of the summed Student-t log density with respect to (m, sd, nu).
inline Vector student_t_log_likelihood_gradient(const Matrix& y, const MarginalModel& g) {
  using D3 = Dual<3>;
  const D3 m = D3::variable(g.m, 0);
  const D3 sd = D3::variable(g.sd, 1);
  const D3 nu = D3::variable(g.nu, 2);
  const D3 s = sd * sqrt((nu - 2.0) / nu);
  const D3 cst = lgamma(0.5 * (nu + 1.0)) - lgamma(0.5 * nu) - 0.5 * log(nu * M_PI) - log(s);
  D3 total(0.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const D3 t = (y(i) - m) / s;
    total = total + cst - 0.5 * (nu + 1.0) * log1p(t * t / nu);
  }
  return Eigen::Map<const Vector>(total.d.data(), 3);
}

namespace detail {

// d/dnu of the Student-t cdf at y with m and sd held fixed.
inline double student_t_dnu(double y, const MarginalModel& g) {
  const double h = 1e-5 * g.nu;
  auto tail = [&](double nu) {
    const MarginalModel q = MarginalModel::student_t(g.m, g.sd, nu);
    const double t = (y - q.m) / q.scale();
    const boost::math::students_t_distribution<double> dist(nu);
    return t < 0.0 ? boost::math::cdf(dist, t) : -boost::math::cdf(boost::math::complement(dist, t));
  };
  return (tail(g.nu + h) - tail(g.nu - h)) / (2.0 * h);
}

}  // namespace detail

// Pooled maximum likelihood for a Student-t margin shared by all sites.
inline MarginalModel fit_student_t(const Matrix& y) {
  const double n = static_cast<double>(y.size());
  if (n < 3) throw ConfigError("fit_student_t: too few observations");
  const double mean = y.mean();
  const double sd = std::sqrt((y.array() - mean).square().sum() / (n - 1.0));
  auto unpack = [](const Vector& t) { return MarginalModel::student_t(t(0), std::exp(t(1)), 2.0 + std::exp(t(2))); };
  auto value = [&](const Vector& t) { return student_t_log_likelihood(y, unpack(t)) / n; };
  ObjectiveFn f = [&](const Vector& t, Vector* grad) {
    const MarginalModel g = unpack(t);
    if (grad) {
      *grad = student_t_log_likelihood_gradient(y, g) / n;
      (*grad)(1) *= g.sd;
      (*grad)(2) *= g.nu - 2.0;
    }
    return value(t);
  };
  Vector t0(3);
  t0 << mean, std::log(sd), std::log(6.0);
  OptimizerOptions opt;
  opt.gradient_tol = 1e-7;
  opt.max_iterations = 300;
  const auto r = maximize_bfgs(f, t0, opt);
  return unpack(r.x);
}

}  // namespace fcop
