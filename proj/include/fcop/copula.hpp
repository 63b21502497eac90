#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fcop/error.hpp"
#include "fcop/factor.hpp"
#include "fcop/numerics/normal.hpp"
#include "fcop/numerics/quadrature.hpp"
#include "fcop/numerics/spd.hpp"
#include "fcop/numerics/summation.hpp"
#include "fcop/parallel.hpp"
#include "fcop/spatial.hpp"

namespace fcop {

// Correlation model and factor law bound to a set of sites.
class FactorCopulaModel {
 public:
  FactorCopulaModel() = default;

  FactorCopulaModel(CorrelationModel corr, FactorSpec factor, LocationSet locations)
      : corr_(std::move(corr)), factor_(std::move(factor)), locations_(std::move(locations)) {
    if (locations_.size() < 1) throw ConfigError("FactorCopulaModel: no sites");
    sigma_z_ = build_sigma_z(corr_, locations_);
    ones_solved_ = sigma_z_.solve(Vector(Vector::Ones(size())));
    a_ = ones_solved_.sum();
  }

  // Model with an explicit Sigma_Z; the correlation model is kept only for reporting.
  FactorCopulaModel(const SpdMatrix& sigma_z, FactorSpec factor, LocationSet locations, CorrelationModel corr = {})
      : corr_(std::move(corr)), factor_(std::move(factor)), locations_(std::move(locations)), sigma_z_(sigma_z) {
    if (sigma_z_.order() != locations_.size()) throw DimensionMismatch("FactorCopulaModel: Sigma_Z order differs from site count");
    ones_solved_ = sigma_z_.solve(Vector(Vector::Ones(size())));
    a_ = ones_solved_.sum();
  }

  Eigen::Index size() const { return locations_.size(); }
  const CorrelationModel& corr() const { return corr_; }
  const FactorSpec& factor() const { return factor_; }
  const LocationSet& locations() const { return locations_; }
  const SpdMatrix& sigma_z() const { return sigma_z_; }
  // Sigma_Z^{-1} 1 and 1' Sigma_Z^{-1} 1.
  const Vector& ones_solved() const { return ones_solved_; }
  double a() const { return a_; }

  std::vector<double> theta_f() const { return factor_.scales(); }
  std::vector<double> theta_sigma() const { return corr_.params(); }

  FactorCopulaModel with_parameters(const std::vector<double>& theta_f, const std::vector<double>& theta_sigma) const {
    return {corr_.with_params(theta_sigma), factor_.with_scales(theta_f), locations_};
  }
  FactorCopulaModel with_factor(FactorSpec f) const {
    FactorCopulaModel m = *this;
    m.factor_ = std::move(f);
    return m;
  }

  // Bivariate sub-model on sites i and j.
  FactorCopulaModel pair(Eigen::Index i, Eigen::Index j) const {
    if (i == j) throw ConfigError("FactorCopulaModel::pair: sites must differ");
    const LocationSet sub = locations_.subset({i, j});
    Matrix s(2, 2);
    s << 1.0, sigma_z_.matrix()(i, j), sigma_z_.matrix()(i, j), 1.0;
    return {cholesky(s), factor_, sub, corr_};
  }

 private:
  CorrelationModel corr_;
  FactorSpec factor_;
  LocationSet locations_;
  SpdMatrix sigma_z_;
  Vector ones_solved_;
  double a_ = 0.0;
};

namespace detail {

struct QuadraticForms {
  double a;
  double b;
  double c;
};

inline QuadraticForms quadratic_forms(const FactorCopulaModel& m, const Vector& w) {
  if (w.size() != m.size()) throw DimensionMismatch("joint density: w has wrong length");
  if (!w.allFinite()) throw DomainError("joint density: non-finite w");
  const Vector r = m.sigma_z().solve(w);
  return {m.a(), m.ones_solved().dot(w), w.dot(r)};
}

inline double gaussian_log_normalizer(const FactorCopulaModel& m) {
  return -0.5 * static_cast<double>(m.size()) * 2.0 * kLogSqrt2Pi - 0.5 * m.sigma_z().logdet();
}

// log of int exp(b v - a v^2 / 2) dF(v) by quadrature, scaled around the best supported point.
inline double log_kernel_integral_quadrature(double a, double b, const FactorSpec& s) {
  if (s.is_degenerate()) return 0.0;
  const double mu = b / a;
  const double lo = s.support_lo();
  const double hi = s.support_hi();
  const double vstar = std::clamp(mu, lo, hi);
  const double shift = -0.5 * a * (vstar - mu) * (vstar - mu) + b * b / (2.0 * a);
  const double sd = 1.0 / std::sqrt(a);
  const double from = std::max(lo, vstar - 40.0 * sd);
  const double to = std::min(hi, vstar + 40.0 * sd);
  auto h = [&](double v) {
    const double e = -0.5 * a * ((v - mu) * (v - mu) - (vstar - mu) * (vstar - mu));
    return e < -745.0 ? 0.0 : std::exp(e) * s.pdf(v);
  };
  std::vector<double> bp;
  for (double k : {-8.0, -3.0, 0.0, 3.0, 8.0}) bp.push_back(vstar + k * sd);
  std::erase_if(bp, [&](double x) { return !(x > from && x < to); });
  std::sort(bp.begin(), bp.end());
  QuadratureConfig cfg = tight_quadrature();
  cfg.rel_tol = 1e-11;
  const double j = integrate_with_singular_point(h, from, to, s.kink(), cfg, bp).value;
  return shift + std::log(j);
}

inline double log_kernel_integral(double a, double b, const FactorSpec& s) {
  if (s.is_degenerate()) return 0.0;
  if (s.exponential_closed_form()) return exp_log_kernel_integral(a, b, s.exp_mixture());
  return log_kernel_integral_quadrature(a, b, s);
}

}  // namespace detail

// log f_n^W(w), closed form when the factor law allows it.
inline double log_joint_density_w(const FactorCopulaModel& m, const Vector& w) {
  const auto q = detail::quadratic_forms(m, w);
  return detail::gaussian_log_normalizer(m) - 0.5 * q.c + detail::log_kernel_integral(q.a, q.b, m.factor());
}

// f_n^W(w) by one-dimensional quadrature over the factor.
inline double joint_density_w(const FactorCopulaModel& m, const Vector& w) {
  const auto q = detail::quadratic_forms(m, w);
  return std::exp(detail::gaussian_log_normalizer(m) - 0.5 * q.c +
                  detail::log_kernel_integral_quadrature(q.a, q.b, m.factor()));
}

inline double joint_density_w_closed(const FactorCopulaModel& m, const Vector& w) {
  if (!m.factor().exponential_closed_form())
    throw ConfigError("joint_density_w_closed: factor must be exponential or exponential difference");
  const auto q = detail::quadratic_forms(m, w);
  return std::exp(detail::gaussian_log_normalizer(m) - 0.5 * q.c +
                  exp_log_kernel_integral(q.a, q.b, m.factor().exp_mixture()));
}

inline void check_open_unit(double u, const char* who) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError(std::string(who) + ": uniforms must lie strictly inside (0,1)");
}

inline double log_copula_density(const FactorCopulaModel& m, const Vector& u) {
  if (u.size() != m.size()) throw DimensionMismatch("copula_density: u has wrong length");
  Vector z(u.size());
  double marg = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    check_open_unit(u(j), "copula_density");
    z(j) = marginal_quantile_w(m.factor(), u(j));
    marg += log_marginal_pdf_w(m.factor(), z(j));
  }
  return log_joint_density_w(m, z) - marg;
}

inline double copula_density(const FactorCopulaModel& m, const Vector& u) { return std::exp(log_copula_density(m, u)); }

namespace detail {

// P(W1 <= z1, W2 <= z2) (lower) or P(W1 > z1, W2 > z2) (upper) for correlation rho,
// integrating the factor cdf (survival) against the derivative of the Gaussian orthant probability.
inline double bivariate_orthant(const FactorSpec& s, double rho, double z1, double z2, bool upper) {
  const double sr = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const double sign = upper ? -1.0 : 1.0;
  auto cond = [&](double x1, double x2) {
    if (sr == 0.0) return (x2 - rho * x1) * sign >= 0.0 ? 1.0 : 0.0;
    return std_normal_cdf(sign * (x2 - rho * x1) / sr);
  };
  auto dens = [&](double v) {
    const double x1 = z1 - v;
    const double x2 = z2 - v;
    return std_normal_pdf(x1) * cond(x1, x2) + std_normal_pdf(x2) * cond(x2, x1);
  };
  auto h = [&](double v) {
    const double g = upper ? s.survival(v) : s.cdf(v);
    return g == 0.0 ? 0.0 : g * dens(v);
  };
  const double zlo = std::min(z1, z2);
  const double zhi = std::max(z1, z2);
  double from = zlo - 40.0;
  double to = zhi + 40.0;
  if (!upper) from = std::max(from, s.support_lo());
  if (upper) to = std::min(to, s.support_hi());
  if (!(from < to)) return 0.0;
  std::vector<double> bp;
  for (double k : {-8.0, -3.0, 0.0, 3.0, 8.0}) {
    bp.push_back(z1 + k);
    bp.push_back(z2 + k);
  }
  std::erase_if(bp, [&](double x) { return !(x > from && x < to); });
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  QuadratureConfig cfg = tight_quadrature();
  cfg.rel_tol = 1e-11;
  return integrate_with_singular_point(h, from, to, s.kink(), cfg, bp).value;
}

}  // namespace detail

// C(u1, u2) for the pair of sites (i, j).
inline double copula_cdf_2(const FactorCopulaModel& m, double u1, double u2, Eigen::Index i = 0, Eigen::Index j = 1) {
  check_open_unit(u1, "copula_cdf_2");
  check_open_unit(u2, "copula_cdf_2");
  const double rho = m.sigma_z().matrix()(i, j);
  const double z1 = marginal_quantile_w(m.factor(), u1);
  const double z2 = marginal_quantile_w(m.factor(), u2);
  if (u1 + u2 <= 1.0) return detail::bivariate_orthant(m.factor(), rho, z1, z2, false);
  return u1 + u2 - 1.0 + detail::bivariate_orthant(m.factor(), rho, z1, z2, true);
}

// P(U1 > 1 - q1, U2 > 1 - q2), accurate for small q.
inline double copula_upper_orthant_2(const FactorCopulaModel& m, double q1, double q2, Eigen::Index i = 0,
                                     Eigen::Index j = 1) {
  check_open_unit(q1, "copula_upper_orthant_2");
  check_open_unit(q2, "copula_upper_orthant_2");
  const double rho = m.sigma_z().matrix()(i, j);
  const double z1 = marginal_quantile_w(m.factor(), 1.0 - q1);
  const double z2 = marginal_quantile_w(m.factor(), 1.0 - q2);
  return detail::bivariate_orthant(m.factor(), rho, z1, z2, true);
}

// Sum over replicates (rows of z, already on the W scale) of log f_n^W minus marginal log densities.
inline double log_likelihood_matrix(const FactorCopulaModel& m, const Matrix& z, int threads = 1) {
  if (z.cols() != m.size()) throw DimensionMismatch("log_likelihood_matrix: column count differs from site count");
  if (!z.allFinite()) throw DomainError("log_likelihood_matrix: non-finite entry");
  const Eigen::Index n_rep = z.rows();
  const Matrix r = m.sigma_z().solve(Matrix(z.transpose()));
  const double norm = detail::gaussian_log_normalizer(m);
  std::vector<double> terms(static_cast<std::size_t>(n_rep));
  parallel_for(static_cast<std::size_t>(n_rep), threads, [&](std::size_t i) {
    const auto row = z.row(static_cast<Eigen::Index>(i));
    const double b = m.ones_solved().dot(row.transpose());
    const double c = row.dot(r.col(static_cast<Eigen::Index>(i)));
    double t = norm - 0.5 * c + detail::log_kernel_integral(m.a(), b, m.factor());
    for (Eigen::Index j = 0; j < row.size(); ++j) t -= log_marginal_pdf_w(m.factor(), row(j));
    terms[i] = t;
  });
  NeumaierSum s;
  for (double t : terms) s.add(t);
  return s.value();
}

}  // namespace fcop
