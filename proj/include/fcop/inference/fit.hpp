#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fcop/inference/likelihood.hpp"
#include "fcop/inference/marginals.hpp"
#include "fcop/inference/optimize.hpp"

namespace fcop {

struct FitConfig {
  int procedure = 1;
  int max_iterations = 200;
  double gradient_tol = 1e-6;
  int step_halving_max = 30;
  // Open intervals on the natural parameters, in FitResult::names order; empty means unbounded.
  std::vector<std::pair<double, double>> parameter_bounds;
  // Natural-scale starting point; empty selects the default.
  std::vector<double> start;
  bool standard_errors = true;
  int threads = 1;

  void validate() const {
    if (procedure < 1 || procedure > 4) throw ConfigError("FitConfig: procedure must be 1, 2, 3 or 4");
    if (max_iterations < 1 || !(gradient_tol > 0.0) || step_halving_max < 1)
      throw ConfigError("FitConfig: tolerances and limits must be positive");
    for (const auto& [lo, hi] : parameter_bounds)
      if (!(lo < hi)) throw ConfigError("FitConfig: empty parameter interval");
  }
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> theta_F;
  std::vector<double> theta_Sigma;
  std::vector<double> theta_G;
  // Aligned with names; NaN when the observed information is not invertible.
  std::vector<double> standard_errors;
  bool standard_errors_available = false;
  double log_likelihood = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<OptimizerTraceRow> trace;
  int procedure = 1;
  std::size_t replicates = 0;
  FactorSpec factor = FactorSpec::gaussian();
  CorrelationModel corr;
  MarginalModel margin;

  std::vector<double> estimates() const {
    std::vector<double> v = theta_F;
    v.insert(v.end(), theta_Sigma.begin(), theta_Sigma.end());
    v.insert(v.end(), theta_G.begin(), theta_G.end());
    return v;
  }
  FactorCopulaModel model(const LocationSet& loc) const { return {corr, factor, loc}; }
};

namespace detail {

enum class Link { log, alpha, nu, identity };

struct Reparam {
  std::vector<Link> links;

  double to_natural(std::size_t k, double t) const {
    switch (links[k]) {
      case Link::log: return std::exp(t);
      case Link::alpha: return 2.0 / (1.0 + std::exp(-t));
      case Link::nu: return 2.0 + std::exp(t);
      case Link::identity: return t;
    }
    return t;
  }
  double to_free(std::size_t k, double x) const {
    switch (links[k]) {
      case Link::log: return std::log(x);
      case Link::alpha: return x >= 2.0 ? 12.0 : -std::log(2.0 / x - 1.0);
      case Link::nu: return std::log(x - 2.0);
      case Link::identity: return x;
    }
    return x;
  }
  // d natural / d free.
  double jacobian(std::size_t k, double t) const {
    switch (links[k]) {
      case Link::log: return std::exp(t);
      case Link::alpha: {
        const double s = 1.0 / (1.0 + std::exp(-t));
        return 2.0 * s * (1.0 - s);
      }
      case Link::nu: return std::exp(t);
      case Link::identity: return 1.0;
    }
    return 1.0;
  }
  Vector natural(const Vector& t) const {
    Vector x(t.size());
    for (Eigen::Index k = 0; k < t.size(); ++k) x(k) = to_natural(static_cast<std::size_t>(k), t(k));
    return x;
  }
  Vector free(const Vector& x) const {
    Vector t(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) t(k) = to_free(static_cast<std::size_t>(k), x(k));
    return t;
  }
};

inline Reparam make_reparam(std::size_t n_factor, CorrelationFamily fam, bool full) {
  Reparam r;
  r.links.assign(n_factor, Link::log);
  r.links.push_back(Link::log);
  if (fam == CorrelationFamily::powered_exponential) r.links.push_back(Link::alpha);
  if (fam == CorrelationFamily::matern) r.links.push_back(Link::log);
  if (full) r.links.insert(r.links.end(), {Link::identity, Link::log, Link::nu});
  return r;
}

// Spearman correlation of two columns of uniforms or observations.
inline double spearman_columns(const Matrix& ranks, Eigen::Index a, Eigen::Index b) {
  const Vector x = ranks.col(a).array() - ranks.col(a).mean();
  const Vector y = ranks.col(b).array() - ranks.col(b).mean();
  const double den = std::sqrt(x.squaredNorm() * y.squaredNorm());
  return den > 0.0 ? x.dot(y) / den : 0.0;
}

// Correlation parameters from a least-squares fit to Spearman-implied Gaussian correlations.
inline std::vector<double> correlation_start(const Matrix& data, const LocationSet& loc, CorrelationFamily fam) {
  const Matrix ranks = rank_transform(data);
  const Matrix dist = distance_matrix(loc);
  std::vector<double> lh;
  std::vector<double> lr;
  for (Eigen::Index i = 0; i < ranks.cols(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r = std::clamp(2.0 * std::sin(M_PI * spearman_columns(ranks, i, j) / 6.0), 0.01, 0.99);
      lh.push_back(std::log(dist(i, j)));
      lr.push_back(std::log(-std::log(r)));
    }
  double theta = 1.0;
  double alpha = 1.0;
  if (lh.size() >= 2) {
    const double mh = std::accumulate(lh.begin(), lh.end(), 0.0) / static_cast<double>(lh.size());
    const double mr = std::accumulate(lr.begin(), lr.end(), 0.0) / static_cast<double>(lr.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < lh.size(); ++k) {
      sxy += (lh[k] - mh) * (lr[k] - mr);
      sxx += (lh[k] - mh) * (lh[k] - mh);
    }
    if (sxx > 1e-12) alpha = sxy / sxx;
    alpha = std::clamp(alpha, 0.2, 1.9);
    theta = std::clamp(std::exp(mr - alpha * mh), 0.05, 20.0);
  } else if (lh.size() == 1) {
    theta = std::clamp(std::exp(lr[0] - lh[0]), 0.05, 20.0);
  }
  switch (fam) {
    case CorrelationFamily::powered_exponential: return {theta, alpha};
    case CorrelationFamily::matern: return {std::clamp(1.0 / theta, 0.05, 20.0), 0.5};
    case CorrelationFamily::damped_cosine: return {1.0};
  }
  return {theta, alpha};
}

inline bool inside(const std::vector<std::pair<double, double>>& bounds, const Vector& x) {
  for (std::size_t k = 0; k < bounds.size() && k < static_cast<std::size_t>(x.size()); ++k) {
    const double v = x(static_cast<Eigen::Index>(k));
    if (!(v > bounds[k].first && v < bounds[k].second)) return false;
  }
  return true;
}

// Second-difference Hessian of a scalar function.
inline Matrix value_hessian(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-3) {
  const Eigen::Index p = x.size();
  Matrix hess(p, p);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < p; ++i) {
    Vector up = x;
    Vector dn = x;
    up(i) += h;
    dn(i) -= h;
    hess(i, i) = (f(up) - 2.0 * f0 + f(dn)) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      Vector pp = x;
      Vector pm = x;
      Vector mp = x;
      Vector mm = x;
      pp(i) += h, pp(j) += h;
      pm(i) += h, pm(j) -= h;
      mp(i) -= h, mp(j) += h;
      mm(i) -= h, mm(j) -= h;
      hess(i, j) = hess(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
    }
  }
  return hess;
}

}  // namespace detail

// Maximum likelihood fit of the factor copula. `form` fixes the factor families (and shapes);
// its scales and the correlation parameters are estimated.
//   procedure 1: y holds known uniforms
//   procedure 2: ranks
//   procedure 3: pooled Student-t margins first, then the pseudo-likelihood
//   procedure 4: joint maximization over copula and Student-t parameters
inline FitResult fit(const Matrix& y, const LocationSet& loc, CorrelationFamily fam, const FactorSpec& form,
                     const FitConfig& cfg = {}) {
  cfg.validate();
  if (y.cols() != static_cast<Eigen::Index>(loc.size())) throw DimensionMismatch("fit: data columns differ from site count");
  if (y.rows() < 2) throw ConfigError("fit: need at least two replicates");
  if (!y.allFinite()) throw DomainError("fit: non-finite observation");

  FitResult res;
  res.procedure = cfg.procedure;
  res.replicates = static_cast<std::size_t>(y.rows());
  Matrix data;
  const bool full = cfg.procedure == 4;
  MarginalModel margin;
  switch (cfg.procedure) {
    case 1:
      for (Eigen::Index i = 0; i < y.size(); ++i) check_open_unit(y(i), "fit");
      data = y;
      break;
    case 2: data = rank_transform(y); break;
    case 3:
      margin = fit_student_t(y);
      data = parametric_transform(y, margin);
      break;
    default:
      data = y;
      break;
  }

  std::vector<double> f_start(form.scales().size(), 1.0);
  std::vector<double> s_start = detail::correlation_start(y, loc, fam);
  std::vector<double> g_start;
  if (full) {
    FitConfig pre = cfg;
    pre.procedure = 3;
    pre.standard_errors = false;
    pre.start.clear();
    if (!cfg.start.empty()) pre.start.assign(cfg.start.begin(), cfg.start.end() - 3);
    pre.parameter_bounds.clear();
    const FitResult r3 = fit(y, loc, fam, form, pre);
    f_start = r3.theta_F;
    s_start = r3.theta_Sigma;
    g_start = {r3.margin.m, r3.margin.sd, r3.margin.nu};
  }
  const FactorSpec tmpl_factor = form.is_degenerate() ? form : form.with_scales(f_start);
  const FactorCopulaModel tmpl(CorrelationModel(fam, s_start), tmpl_factor, loc);
  const CopulaObjective obj(tmpl, data, full, cfg.threads);
  res.names = obj.names();
  const detail::Reparam rp = detail::make_reparam(obj.n_factor(), fam, full);

  Vector x0(static_cast<Eigen::Index>(obj.dim()));
  if (!cfg.start.empty()) {
    if (cfg.start.size() != obj.dim()) throw DimensionMismatch("fit: starting point has the wrong length");
    x0 = Eigen::Map<const Vector>(cfg.start.data(), static_cast<Eigen::Index>(cfg.start.size()));
  } else {
    std::vector<double> v = f_start;
    v.insert(v.end(), s_start.begin(), s_start.end());
    v.insert(v.end(), g_start.begin(), g_start.end());
    x0 = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  if (!detail::inside(cfg.parameter_bounds, x0)) throw ConfigError("fit: starting point lies outside the parameter bounds");

  const bool analytic = obj.has_analytic_gradient();
  auto value_t = [&](const Vector& t) {
    const Vector x = rp.natural(t);
    if (!detail::inside(cfg.parameter_bounds, x)) return -std::numeric_limits<double>::infinity();
    return obj.value(x);
  };
  auto gradient_t = [&](const Vector& t) {
    if (!analytic) return central_gradient(value_t, t, 1e-5);
    const Vector x = rp.natural(t);
    Vector g;
    obj.value_and_gradient(x, g);
    for (Eigen::Index k = 0; k < g.size(); ++k) g(k) *= rp.jacobian(static_cast<std::size_t>(k), t(k));
    return g;
  };
  ObjectiveFn f = [&](const Vector& t, Vector* grad) {
    const double v = value_t(t);
    if (grad && std::isfinite(v)) *grad = gradient_t(t);
    return v;
  };

  OptimizerOptions opt;
  opt.max_iterations = cfg.max_iterations;
  opt.gradient_tol = cfg.gradient_tol;
  opt.step_halving_max = cfg.step_halving_max;
  const OptimizerResult r = maximize_bfgs(f, rp.free(x0), opt);

  const Vector xhat = rp.natural(r.x);
  const auto nf = static_cast<Eigen::Index>(obj.n_factor());
  const auto ns = static_cast<Eigen::Index>(obj.n_sigma());
  res.theta_F.assign(xhat.data(), xhat.data() + nf);
  res.theta_Sigma.assign(xhat.data() + nf, xhat.data() + nf + ns);
  res.theta_G.assign(xhat.data() + nf + ns, xhat.data() + xhat.size());
  res.iterations = r.iterations;
  res.converged = r.converged;
  res.gradient_norm = r.gradient_norm;
  res.trace = r.trace;
  const double n_rep = static_cast<double>(y.rows());
  res.log_likelihood = r.objective * n_rep;
  const auto k = static_cast<double>(xhat.size());
  res.aic = -2.0 * res.log_likelihood + 2.0 * k;
  res.bic = -2.0 * res.log_likelihood + k * std::log(n_rep);
  res.factor = form.is_degenerate() ? form : form.with_scales(res.theta_F);
  res.corr = CorrelationModel(fam, res.theta_Sigma);
  res.margin = full ? obj.margin_at(xhat) : margin;
  if (cfg.procedure == 3) {
    // First-stage margin estimates; no standard errors for this two-step stage.
    res.theta_G = {margin.m, margin.sd, margin.nu};
    res.names.insert(res.names.end(), {"m", "sd", "nu"});
  }

  res.standard_errors.assign(res.names.size(), std::numeric_limits<double>::quiet_NaN());
  if (cfg.standard_errors) {
    try {
      const Matrix h = analytic ? central_hessian(gradient_t, r.x, 1e-4) : detail::value_hessian(value_t, r.x);
      const Eigen::LLT<Matrix> llt(-h);
      if (llt.info() == Eigen::Success && h.allFinite()) {
        const Matrix cov = llt.solve(Matrix(Matrix::Identity(h.rows(), h.cols()))) / n_rep;
        for (Eigen::Index j = 0; j < xhat.size(); ++j)
          res.standard_errors[static_cast<std::size_t>(j)] =
              std::abs(rp.jacobian(static_cast<std::size_t>(j), r.x(j))) * std::sqrt(cov(j, j));
        res.standard_errors_available = true;
      }
    } catch (const NumericError&) {
    } catch (const DomainError&) {
    }
  }
  return res;
}

}  // namespace fcop
