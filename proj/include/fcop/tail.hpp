#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fcop/copula.hpp"
#include "fcop/inference/marginals.hpp"
#include "fcop/simulation/sampling.hpp"

namespace fcop {

enum class Tail { lower, upper };

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Limit tail coefficient for a factor with tail order alpha: closed form at alpha = 1, perfect
// dependence below, independence above.
inline double theoretical_lambda(double theta, double rho, double alpha = 1.0) {
  if (!(rho < 1.0) || !(rho >= -1.0)) throw DomainError("theoretical_lambda: rho must lie in [-1, 1)");
  if (!(theta > 0.0)) throw DomainError("theoretical_lambda: theta must be positive");
  if (!(alpha >= 0.0)) throw DomainError("theoretical_lambda: alpha must be nonnegative");
  if (alpha < 1.0) return 1.0;
  if (alpha > 1.0) return 0.0;
  return 2.0 * std_normal_cdf(-theta * std::sqrt(0.5 * (1.0 - rho)));
}

struct TailIntegrals {
  double joint_survival;
  double marginal_survival;
  double ratio() const { return joint_survival / marginal_survival; }
};

// Single-integral forms of P(W1 > z, W2 > z) and P(W1 > z) for correlation rho. The lower tail
// returns P(W1 < z, W2 < z) and P(W1 < z).
inline TailIntegrals appendix_tail_integrals(const FactorSpec& s, double rho, double z, Tail tail = Tail::upper) {
  if (!(rho > -1.0 && rho < 1.0)) throw DomainError("appendix_tail_integrals: rho must lie in (-1, 1)");
  const double k = std::sqrt((1.0 - rho) / (1.0 + rho));
  const bool up = tail == Tail::upper;
  auto prob = [&](double w) {
    const double v = up ? z - w : z + w;
    if (s.is_degenerate()) return (up ? v <= 0.0 : v >= 0.0) ? 1.0 : 0.0;
    return up ? s.survival(v) : s.cdf(v);
  };
  const double kink = s.is_degenerate() ? 0.0 : s.kink();
  const double singular = up ? z - kink : kink - z;
  std::vector<double> bp{-8.0, -3.0, 0.0, 3.0, 8.0};
  auto joint = [&](double w) { return 2.0 * prob(w) * std_normal_pdf(w) * std_normal_cdf(-k * w); };
  auto marg = [&](double w) { return prob(w) * std_normal_pdf(w); };
  const QuadratureConfig cfg = tight_quadrature();
  return {integrate_with_singular_point(joint, -38.5, 38.5, singular, cfg, bp).value,
          integrate_with_singular_point(marg, -38.5, 38.5, singular, cfg, bp).value};
}

inline TailIntegrals appendix_tail_integrals(const FactorCopulaModel& m, double z, Tail tail = Tail::upper) {
  if (m.size() != 2) throw DimensionMismatch("appendix_tail_integrals: bivariate model required");
  return appendix_tail_integrals(m.factor(), m.sigma_z().matrix()(0, 1), z, tail);
}

// Finite-level tail dependence C(q,q)/q (lower) or [2q - 1 + C(1-q,1-q)]/q (upper) for sites (i, j).
// Levels below 1e-4 use the single-integral diagonal path.
inline double lambda_q(const FactorCopulaModel& m, double q, Tail tail, Eigen::Index i = 0, Eigen::Index j = 1) {
  if (!(q > 0.0 && q <= 0.5)) throw DomainError("lambda_q: q must lie in (0, 0.5]");
  if (q < 1e-4) {
    const FactorSpec& s = m.factor();
    const double z = tail == Tail::lower ? marginal_quantile_w(s, q) : marginal_quantile_w(s, 1.0 - q);
    return appendix_tail_integrals(s, m.sigma_z().matrix()(i, j), z, tail).joint_survival / q;
  }
  if (tail == Tail::lower) return copula_cdf_2(m, q, q, i, j) / q;
  return copula_upper_orthant_2(m, q, q, i, j) / q;
}

// Stable tail dependence function of the Husler-Reiss family.
inline double husler_reiss_ell(double x1, double x2, double lambda) {
  if (!(x1 > 0.0) || !(x2 > 0.0) || !(lambda > 0.0)) throw DomainError("husler_reiss_ell: arguments must be positive");
  const double l = std::log(x1 / x2) / lambda;
  return x1 * std_normal_cdf(0.5 * lambda + l) + x2 * std_normal_cdf(0.5 * lambda - l);
}

// Husler-Reiss parameter of the exponential-factor upper tail.
inline double husler_reiss_lambda(double theta1, double rho) { return theta1 * std::sqrt(2.0 * (1.0 - rho)); }

// Pre-limit stable tail dependence {1 - C(1 - q x1, 1 - q x2)} / q.
inline double empirical_ell(const FactorCopulaModel& m, double q, double x1, double x2, Eigen::Index i = 0,
                            Eigen::Index j = 1) {
  return x1 + x2 - copula_upper_orthant_2(m, q * x1, q * x2, i, j) / q;
}

namespace detail {

inline Estimate mean_and_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

inline double pearson(const Vector& x, const Vector& y) {
  const Vector a = x.array() - x.mean();
  const Vector b = y.array() - y.mean();
  const double den = std::sqrt(a.squaredNorm() * b.squaredNorm());
  if (!(den > 0.0)) throw DomainError("correlation: constant column");
  return a.dot(b) / den;
}

}  // namespace detail

// Uniform draws (U1, U2) at sites (i, j).
inline Matrix sample_pair_uniforms(const FactorCopulaModel& m, Eigen::Index n_draws, std::uint64_t seed,
                                   Eigen::Index i = 0, Eigen::Index j = 1, int threads = 1) {
  const auto p = m.pair(i, j);
  return to_uniform(p.factor(), sample_replicates(p, n_draws, seed), threads);
}

inline Estimate zeta1(const FactorCopulaModel& m, Eigen::Index n_draws = 100000, std::uint64_t seed = 1,
                      Eigen::Index i = 0, Eigen::Index j = 1, int threads = 1) {
  if (n_draws < 10000) throw ConfigError("zeta1: need at least 1e4 draws");
  const Matrix u = sample_pair_uniforms(m, n_draws, seed, i, j, threads);
  std::vector<double> v(static_cast<std::size_t>(n_draws));
  for (Eigen::Index r = 0; r < n_draws; ++r) v[static_cast<std::size_t>(r)] = std::pow(u(r, 0) + u(r, 1) - 1.0, 3);
  return detail::mean_and_se(v);
}

// Spearman's rho of two data columns.
inline double spearman_rho(const Vector& x, const Vector& y) {
  Matrix d(x.size(), 2);
  d.col(0) = x;
  d.col(1) = y;
  const Matrix r = rank_transform(d);
  return detail::pearson(r.col(0), r.col(1));
}

// Model Spearman's rho by Monte Carlo: 12 E[U1 U2] - 3.
inline Estimate spearman_rho(const FactorCopulaModel& m, Eigen::Index n_draws = 100000, std::uint64_t seed = 1,
                             Eigen::Index i = 0, Eigen::Index j = 1, int threads = 1) {
  const Matrix u = sample_pair_uniforms(m, n_draws, seed, i, j, threads);
  std::vector<double> v(static_cast<std::size_t>(n_draws));
  for (Eigen::Index r = 0; r < n_draws; ++r) v[static_cast<std::size_t>(r)] = 12.0 * u(r, 0) * u(r, 1) - 3.0;
  return detail::mean_and_se(v);
}

// Tail-weighted dependence: correlation of ((1 - 2U1)+)^k and ((1 - 2U2)+)^k over the joint
// lower quadrant (mirrored for the upper tail). Inputs are uniform scores.
inline Estimate tail_weighted(const Vector& u1, const Vector& u2, Tail tail, int k = 6) {
  if (u1.size() != u2.size()) throw DimensionMismatch("tail_weighted: columns differ in length");
  if (k < 1) throw ConfigError("tail_weighted: power must be at least 1");
  std::vector<double> a;
  std::vector<double> b;
  for (Eigen::Index r = 0; r < u1.size(); ++r) {
    const double x = tail == Tail::lower ? 1.0 - 2.0 * u1(r) : 2.0 * u1(r) - 1.0;
    const double y = tail == Tail::lower ? 1.0 - 2.0 * u2(r) : 2.0 * u2(r) - 1.0;
    if (x > 0.0 && y > 0.0) {
      a.push_back(std::pow(x, k));
      b.push_back(std::pow(y, k));
    }
  }
  if (a.size() < 3) throw DomainError("tail_weighted: too few points in the tail quadrant");
  const double r = detail::pearson(Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size())),
                                   Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size())));
  return {r, (1.0 - r * r) / std::sqrt(static_cast<double>(a.size()))};
}

// Pairwise Spearman and tail-weighted matrices of a data set (replicates in rows).
struct DependenceMatrices {
  Matrix rho_s;
  Matrix alpha_l;
  Matrix alpha_u;
};

inline DependenceMatrices dependence_matrices(const Matrix& data, int k = 6) {
  const Matrix u = rank_transform(data);
  const Eigen::Index n = u.cols();
  DependenceMatrices d{Matrix::Identity(n, n), Matrix::Identity(n, n), Matrix::Identity(n, n)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      d.rho_s(i, j) = d.rho_s(j, i) = detail::pearson(u.col(i), u.col(j));
      d.alpha_l(i, j) = d.alpha_l(j, i) = tail_weighted(u.col(i), u.col(j), Tail::lower, k).value;
      d.alpha_u(i, j) = d.alpha_u(j, i) = tail_weighted(u.col(i), u.col(j), Tail::upper, k).value;
    }
  return d;
}

// Model-based matrices from simulated replicates; ranks make the marginal transform unnecessary.
inline DependenceMatrices model_dependence_matrices(const FactorCopulaModel& m, Eigen::Index n_draws = 100000,
                                                    std::uint64_t seed = 1, int k = 6) {
  return dependence_matrices(sample_replicates(m, n_draws, seed), k);
}

struct DeltaMetrics {
  double rho;
  double rho_abs;
  double lower;
  double lower_abs;
  double upper;
  double upper_abs;
};

// Signed and absolute mean differences (empirical minus model) over all n^2 entries.
inline DeltaMetrics delta_metrics(const DependenceMatrices& emp, const DependenceMatrices& model) {
  auto check = [](const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
      throw DimensionMismatch("delta_metrics: matrices must be square and of equal size");
  };
  check(emp.rho_s, model.rho_s);
  check(emp.alpha_l, model.alpha_l);
  check(emp.alpha_u, model.alpha_u);
  const double n2 = static_cast<double>(emp.rho_s.size());
  auto signed_mean = [&](const Matrix& a, const Matrix& b) { return (a - b).sum() / n2; };
  auto abs_mean = [&](const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().sum() / n2; };
  return {signed_mean(emp.rho_s, model.rho_s),     abs_mean(emp.rho_s, model.rho_s),
          signed_mean(emp.alpha_l, model.alpha_l), abs_mean(emp.alpha_l, model.alpha_l),
          signed_mean(emp.alpha_u, model.alpha_u), abs_mean(emp.alpha_u, model.alpha_u)};
}

struct TailReport {
  std::vector<double> q;
  std::vector<double> lambda_l;
  std::vector<double> lambda_u;
  std::vector<double> asymmetry;
  Estimate zeta1;
  Estimate spearman;
  Estimate alpha_l;
  Estimate alpha_u;
};

inline TailReport tail_report(const FactorCopulaModel& m, const std::vector<double>& q_grid, Eigen::Index n_draws,
                              std::uint64_t seed, Eigen::Index i = 0, Eigen::Index j = 1, int threads = 1) {
  TailReport r;
  r.q = q_grid;
  for (double q : q_grid) {
    r.lambda_l.push_back(lambda_q(m, q, Tail::lower, i, j));
    r.lambda_u.push_back(lambda_q(m, q, Tail::upper, i, j));
    r.asymmetry.push_back(r.lambda_l.back() / r.lambda_u.back());
  }
  const Matrix u = sample_pair_uniforms(m, n_draws, seed, i, j, threads);
  std::vector<double> z(static_cast<std::size_t>(n_draws));
  std::vector<double> s(static_cast<std::size_t>(n_draws));
  for (Eigen::Index k = 0; k < n_draws; ++k) {
    z[static_cast<std::size_t>(k)] = std::pow(u(k, 0) + u(k, 1) - 1.0, 3);
    s[static_cast<std::size_t>(k)] = 12.0 * u(k, 0) * u(k, 1) - 3.0;
  }
  r.zeta1 = detail::mean_and_se(z);
  r.spearman = detail::mean_and_se(s);
  r.alpha_l = tail_weighted(u.col(0), u.col(1), Tail::lower);
  r.alpha_u = tail_weighted(u.col(0), u.col(1), Tail::upper);
  return r;
}

}  // namespace fcop
