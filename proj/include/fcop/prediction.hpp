#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "fcop/copula.hpp"
#include "fcop/inference/marginals.hpp"
#include "fcop/parallel.hpp"

namespace fcop {

// Discrete rule for the posterior of V0 given observed W = w: nodes and normalized weights.
struct FactorPosterior {
  std::vector<double> nodes;
  std::vector<double> weights;
  // log of int exp(b v - a v^2 / 2) dF(v) as integrated by the rule.
  double log_normalizer = 0.0;
};

inline FactorPosterior factor_posterior(const FactorSpec& s, double a, double b) {
  FactorPosterior post;
  if (s.is_degenerate()) {
    post.nodes = {0.0};
    post.weights = {1.0};
    return post;
  }
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const double mu = b / a;
  const double vstar = std::clamp(mu, s.support_lo(), s.support_hi());
  const double sd = 1.0 / std::sqrt(a);
  const double from = std::max(s.support_lo(), vstar - 40.0 * sd);
  const double to = std::min(s.support_hi(), vstar + 40.0 * sd);
  const double kink = s.kink();
  std::vector<double> cuts{from, to};
  for (double k : {-8.0, -3.0, 0.0, 3.0, 8.0}) cuts.push_back(vstar + k * sd);
  cuts.push_back(kink);
  std::erase_if(cuts, [&](double x) { return x < from || x > to; });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> logw;
  const double base = -0.5 * a * (vstar - mu) * (vstar - mu);
  auto add = [&](double v, double jw) {
    const double f = s.pdf(v);
    if (!(f > 0.0) || !std::isfinite(f) || !(jw > 0.0)) return;
    post.nodes.push_back(v);
    logw.push_back(-0.5 * a * (v - mu) * (v - mu) - base + std::log(f * jw));
  };
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p];
    const double hi = cuts[p + 1];
    const int pieces = std::clamp(static_cast<int>(std::ceil((hi - lo) / sd)), 1, 80);
    const bool left_kink = lo == kink;
    const bool right_kink = hi == kink;
    const double len = hi - lo;
    std::vector<double> ts;
    for (int k = 0; k <= pieces; ++k) ts.push_back(static_cast<double>(k) / pieces);
    if (left_kink || right_kink) {
      // Geometric grading towards the kink for algebraic endpoint behaviour.
      for (int k = 1; k <= 16; ++k) ts.push_back(std::ldexp(1.0 / pieces, -k));
      std::sort(ts.begin(), ts.end());
    }
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      const double t0 = ts[k];
      const double t1 = ts[k + 1];
      const double half = 0.5 * (t1 - t0);
      const double mid = 0.5 * (t0 + t1);
      auto node = [&](double x, double gw) {
        const double t = mid + half * x;
        const double w = gw * half;
        // Cubic map clusters nodes at the kink, where the factor density is not smooth.
        if (left_kink) return add(lo + len * t * t * t, w * 3.0 * len * t * t);
        if (right_kink) return add(hi - len * t * t * t, w * 3.0 * len * t * t);
        add(lo + len * t, w * len);
      };
      const auto& x = Rule::abscissa();
      const auto& gw = Rule::weights();
      for (std::size_t i = 0; i < x.size(); ++i) {
        node(x[i], gw[i]);
        if (x[i] != 0.0) node(-x[i], gw[i]);
      }
    }
  }
  if (logw.empty()) throw NumericError("factor_posterior: no posterior mass found");
  const double top = *std::max_element(logw.begin(), logw.end());
  NeumaierSum total;
  std::vector<double> kept_nodes;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    const double w = std::exp(logw[i] - top);
    if (w < 1e-20) continue;
    kept_nodes.push_back(post.nodes[i]);
    post.weights.push_back(w);
    total.add(w);
  }
  post.nodes = std::move(kept_nodes);
  for (double& w : post.weights) w /= total.value();
  post.log_normalizer = top + base + b * b / (2.0 * a) + std::log(total.value());
  return post;
}

// Law of W0 at an unobserved site given W = w at the model sites: a posterior mixture over
// V0 of Gaussians with mean c0 + d v and standard deviation tau.
class ConditionalDistribution {
 public:
  ConditionalDistribution(const FactorCopulaModel& m, const Vector& w_obs, std::shared_ptr<const FactorPosterior> post,
                          const Vector& sigma0)
      : factor_(m.factor()), post_(std::move(post)) {
    if (sigma0.size() != m.size()) throw DimensionMismatch("ConditionalDistribution: correlation vector has wrong length");
    const Vector k = m.sigma_z().solve(sigma0);
    const double tau2 = 1.0 - sigma0.dot(k);
    if (!(tau2 > 1e-12)) throw DomainError("ConditionalDistribution: target site coincides with an observed site");
    tau_ = std::sqrt(tau2);
    c0_ = k.dot(w_obs);
    d_ = 1.0 - k.sum();
    lo_ = hi_ = c0_ + d_ * post_->nodes.front();
    for (double v : post_->nodes) {
      lo_ = std::min(lo_, c0_ + d_ * v);
      hi_ = std::max(hi_, c0_ + d_ * v);
    }
  }

  double tau() const { return tau_; }
  double location() const { return c0_; }

  double cdf_w(double w0) const {
    NeumaierSum s;
    for (std::size_t i = 0; i < post_->nodes.size(); ++i)
      s.add(post_->weights[i] * std_normal_cdf((w0 - mean_at(i)) / tau_));
    return s.value();
  }
  double sf_w(double w0) const {
    NeumaierSum s;
    for (std::size_t i = 0; i < post_->nodes.size(); ++i)
      s.add(post_->weights[i] * std_normal_cdf((mean_at(i) - w0) / tau_));
    return s.value();
  }
  double pdf_w(double w0) const {
    NeumaierSum s;
    for (std::size_t i = 0; i < post_->nodes.size(); ++i)
      s.add(post_->weights[i] * std_normal_pdf((w0 - mean_at(i)) / tau_));
    return s.value() / tau_;
  }

  double quantile_w(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("conditional quantile: p must lie in (0,1)");
    RootOptions opt;
    opt.f_tol = 1e-12;
    const Bracket br{lo_ - 10.0 * tau_, hi_ + 10.0 * tau_};
    if (p <= 0.5)
      return invert_monotone_cdf([&](double x) { return cdf_w(x); }, [&](double x) { return pdf_w(x); }, p, br,
                                 std_normal_quantile(p) * tau_ + 0.5 * (lo_ + hi_), opt);
    // Upper half solved on the survival scale for tail accuracy.
    const double x = invert_monotone_cdf([&](double x) { return sf_w(-x); }, [&](double x) { return pdf_w(-x); },
                                         1.0 - p, Bracket{-br.hi, -br.lo},
                                         std_normal_quantile(1.0 - p) * tau_ - 0.5 * (lo_ + hi_), opt);
    return -x;
  }

  // Copula scale.
  double cdf(double u0) const {
    check_open_unit(u0, "conditional_cdf");
    return cdf_w(marginal_quantile_w(factor_, u0));
  }
  double density(double u0) const {
    check_open_unit(u0, "conditional_density");
    const double w0 = marginal_quantile_w(factor_, u0);
    return pdf_w(w0) / marginal_pdf_w(factor_, w0);
  }
  double quantile(double p) const {
    const double w0 = quantile_w(p);
    return w0 <= 0.0 ? marginal_cdf_w(factor_, w0) : 1.0 - marginal_sf_w(factor_, w0);
  }

  // E g(W0) for the conditional law.
  template <class G>
  double expectation_w(G&& g) const {
    auto h = [&](double w0) {
      const double d = pdf_w(w0);
      return d == 0.0 ? 0.0 : g(w0) * d;
    };
    std::vector<double> bp;
    for (double k : {-8.0, -3.0, 0.0, 3.0, 8.0}) {
      bp.push_back(lo_ + k * tau_);
      bp.push_back(hi_ + k * tau_);
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-10;
    cfg.max_subdivisions = 2000;
    return integrate_real_line(h, lo_ - 40.0 * tau_, hi_ + 40.0 * tau_, cfg, bp).value;
  }
  // Conditional mean of U0.
  double mean() const {
    return expectation_w([&](double w0) { return marginal_cdf_w(factor_, w0); });
  }

 private:
  double mean_at(std::size_t i) const { return c0_ + d_ * post_->nodes[i]; }

  FactorSpec factor_;
  std::shared_ptr<const FactorPosterior> post_;
  double tau_ = 1.0;
  double c0_ = 0.0;
  double d_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

struct PredictionRequest {
  FactorCopulaModel model;
  // Observed uniforms at the model sites.
  Vector u;
  LocationSet targets;
  std::vector<double> quantile_levels{0.05, 0.5, 0.95};
  // Back-transform of quantiles and mean to the data scale.
  std::optional<MarginalModel> margin;
  int threads = 1;
};

// Conditioning state shared by every target site of a request.
class Predictor {
 public:
  explicit Predictor(const PredictionRequest& req) : model_(req.model) {
    if (req.u.size() != req.model.size()) throw DimensionMismatch("Predictor: observed vector has wrong length");
    for (double p : req.quantile_levels)
      if (!(p > 0.0 && p < 1.0)) throw DomainError("Predictor: quantile levels must lie in (0,1)");
    w_obs_.resize(req.u.size());
    for (Eigen::Index j = 0; j < req.u.size(); ++j) {
      check_open_unit(req.u(j), "Predictor");
      w_obs_(j) = marginal_quantile_w(req.model.factor(), req.u(j));
    }
    const auto q = detail::quadratic_forms(req.model, w_obs_);
    post_ = std::make_shared<const FactorPosterior>(factor_posterior(req.model.factor(), q.a, q.b));
  }

  const FactorPosterior& posterior() const { return *post_; }
  const Vector& observed_w() const { return w_obs_; }

  ConditionalDistribution at(const Vector& site) const {
    const LocationSet& loc = model_.locations();
    if (site.size() != loc.coords().cols()) throw DimensionMismatch("Predictor: target site has wrong dimension");
    Vector s0(loc.size());
    for (Eigen::Index j = 0; j < loc.size(); ++j) {
      const double h = (loc.coords().row(j).transpose() - site).norm();
      if (h == 0.0) throw DomainError("Predictor: target site coincides with observed site " + loc.labels()[static_cast<std::size_t>(j)]);
      s0(j) = model_.corr()(h);
    }
    return {model_, w_obs_, post_, s0};
  }

 private:
  FactorCopulaModel model_;
  Vector w_obs_;
  std::shared_ptr<const FactorPosterior> post_;
};

inline double conditional_cdf(const PredictionRequest& req, const Vector& s0, double u0) {
  return Predictor(req).at(s0).cdf(u0);
}
inline double conditional_quantile(const PredictionRequest& req, const Vector& s0, double p) {
  return Predictor(req).at(s0).quantile(p);
}
inline double conditional_mean(const PredictionRequest& req, const Vector& s0) { return Predictor(req).at(s0).mean(); }

struct SitePrediction {
  std::string id;
  Vector coords;
  std::vector<double> quantiles;
  double mean = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;
};

struct PredictionSurface {
  std::vector<double> levels;
  bool back_transformed = false;
  std::vector<SitePrediction> sites;
  std::size_t failures = 0;
};

// Student-t quantile taking the lower or upper tail probability, whichever is smaller.
inline double margin_inverse(const MarginalModel& g, double lower, double upper) {
  const boost::math::students_t_distribution<double> dist(g.nu);
  const double tiny = std::numeric_limits<double>::min();
  if (lower <= upper) return g.m + g.scale() * boost::math::quantile(dist, std::max(lower, tiny));
  return g.m - g.scale() * boost::math::quantile(dist, std::max(upper, tiny));
}

inline PredictionSurface predict_grid(const PredictionRequest& req) {
  const Predictor pred(req);
  PredictionSurface out;
  out.levels = req.quantile_levels;
  out.back_transformed = req.margin.has_value();
  const auto n = static_cast<std::size_t>(req.targets.size());
  out.sites.resize(n);
  const FactorSpec& f = req.model.factor();
  parallel_for(n, req.threads, [&](std::size_t i) {
    SitePrediction& sp = out.sites[i];
    sp.id = req.targets.labels()[i];
    sp.coords = req.targets.coords().row(static_cast<Eigen::Index>(i)).transpose();
    try {
      const auto cd = pred.at(sp.coords);
      for (double p : req.quantile_levels) {
        if (!req.margin) {
          sp.quantiles.push_back(cd.quantile(p));
        } else {
          const double w0 = cd.quantile_w(p);
          sp.quantiles.push_back(margin_inverse(*req.margin, marginal_cdf_w(f, w0), marginal_sf_w(f, w0)));
        }
      }
      if (!req.margin)
        sp.mean = cd.mean();
      else
        sp.mean = cd.expectation_w(
            [&](double w0) { return margin_inverse(*req.margin, marginal_cdf_w(f, w0), marginal_sf_w(f, w0)); });
      sp.ok = true;
    } catch (const Error& e) {
      sp.error = e.what();
    }
  });
  for (const auto& s : out.sites) out.failures += s.ok ? 0 : 1;
  return out;
}

}  // namespace fcop
