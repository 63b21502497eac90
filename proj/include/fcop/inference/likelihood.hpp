#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "fcop/copula.hpp"
#include "fcop/inference/marginals.hpp"
#include "fcop/numerics/dual.hpp"

namespace fcop {

// Normal score x = Phi^{-1}(u) -> W-scale quantile z = (F_1^W)^{-1}(u) and log f_1^W(z),
// tabulated on a uniform x grid (Hermite for z, cubic spline for log f).
class ScoreMap {
 public:
  ScoreMap(const FactorSpec& s, double x_lo, double x_hi, double spacing = 0.0125) : spec_(s) {
    if (!(x_lo <= x_hi) || !std::isfinite(x_lo) || !std::isfinite(x_hi))
      throw DomainError("ScoreMap: invalid score range");
    if (s.is_degenerate()) return;
    x_lo -= 2.0 * spacing;
    x_hi += 2.0 * spacing;
    const int count = std::clamp(static_cast<int>(std::ceil((x_hi - x_lo) / spacing)) + 1, 8, 4000);
    h_ = (x_hi - x_lo) / (count - 1);
    x0_ = x_lo;
    z_.resize(count);
    dz_.resize(count);
    std::vector<double> lf(count);
    // Solve from the centre outwards so each node warm-starts its neighbour.
    int mid = std::clamp(static_cast<int>(std::lround(-x0_ / h_)), 0, count - 1);
    auto solve = [&](int k, double start) {
      const double x = x0_ + k * h_;
      z_[k] = marginal_quantile_w(s, std_normal_cdf(x), start);
      lf[k] = log_marginal_pdf_w(s, z_[k]);
      dz_[k] = std::exp(-0.5 * x * x - kLogSqrt2Pi - lf[k]);
    };
    solve(mid, kInf);
    for (int k = mid + 1; k < count; ++k) solve(k, z_[k - 1] + h_ * dz_[k - 1]);
    for (int k = mid - 1; k >= 0; --k) solve(k, z_[k + 1] - h_ * dz_[k + 1]);
    log_pdf_ = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(lf.begin(), lf.end(), x0_, h_);
  }

  double z(double x) const {
    if (spec_.is_degenerate()) return x;
    const double pos = std::clamp((x - x0_) / h_, 0.0, static_cast<double>(z_.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(pos), z_.size() - 2);
    const double t = pos - static_cast<double>(k);
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * z_[k] + (t3 - 2 * t2 + t) * h_ * dz_[k] + (-2 * t3 + 3 * t2) * z_[k + 1] +
           (t3 - t2) * h_ * dz_[k + 1];
  }
  double log_pdf(double x) const {
    if (spec_.is_degenerate()) return -0.5 * x * x - kLogSqrt2Pi;
    return (*log_pdf_)(x);
  }

 private:
  FactorSpec spec_;
  double x0_ = 0.0;
  double h_ = 1.0;
  std::vector<double> z_;
  std::vector<double> dz_;
  std::shared_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> log_pdf_;
};

// W-scale data and the total marginal log density for one value of the factor parameters.
struct WScaleData {
  Matrix z;
  double log_marginal = 0.0;
};

// Transforms uniforms (given with their normal scores) to the W scale. With `exact` set, the
// quadrature path refines every interpolated quantile by a Newton step on the exact marginal.
inline WScaleData to_w_scale(const FactorSpec& s, const Matrix& u, const Matrix& x, bool exact = false) {
  WScaleData out;
  out.z.resize(u.rows(), u.cols());
  if (s.is_degenerate()) {
    out.z = x;
    out.log_marginal = (-0.5 * x.array().square() - kLogSqrt2Pi).sum();
    return out;
  }
  const ScoreMap map(s, x.minCoeff(), x.maxCoeff());
  NeumaierSum lf;
  if (s.exponential_closed_form()) {
    const auto mix = s.exp_mixture();
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      double z = map.z(x(i));
      // One Newton step from the interpolant is exact to rounding.
      const auto em = exp_marginal(z, mix);
      const double f = std::exp(em.log_pdf);
      z += u(i) <= 0.5 ? (u(i) - em.cdf) / f : (em.sf - (1.0 - u(i))) / f;
      out.z(i) = z;
      lf.add(exp_marginal(z, mix).log_pdf);
    }
  } else if (exact) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      double z = map.z(x(i));
      const double step = u(i) <= 0.5 ? (u(i) - marginal_cdf_w(s, z)) : (marginal_sf_w(s, z) - (1.0 - u(i)));
      z += step / marginal_pdf_w(s, z);
      out.z(i) = z;
      lf.add(log_marginal_pdf_w(s, z));
    }
  } else {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      out.z(i) = map.z(x(i));
      lf.add(map.log_pdf(x(i)));
    }
  }
  out.log_marginal = lf.value();
  return out;
}

inline Matrix normal_scores(const Matrix& u) {
  Matrix x(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    check_open_unit(u(i), "normal_scores");
    x(i) = std_normal_quantile(u(i));
  }
  return x;
}

// Sum over replicates of log f_n^W(z_i).
inline double joint_log_sum(const FactorCopulaModel& m, const Matrix& z, int threads = 1) {
  const Matrix r = m.sigma_z().solve(Matrix(z.transpose()));
  const double norm = -0.5 * static_cast<double>(m.size()) * 2.0 * kLogSqrt2Pi - 0.5 * m.sigma_z().logdet();
  std::vector<double> terms(static_cast<std::size_t>(z.rows()));
  parallel_for(terms.size(), threads, [&](std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double b = m.ones_solved().dot(z.row(k).transpose());
    const double c = z.row(k).dot(r.col(k));
    terms[i] = norm - 0.5 * c + detail::log_kernel_integral(m.a(), b, m.factor());
  });
  NeumaierSum s;
  for (double t : terms) s.add(t);
  return s.value();
}

inline double pseudo_log_likelihood(const FactorCopulaModel& m, const Matrix& u, int threads = 1) {
  if (u.cols() != m.size()) throw DimensionMismatch("pseudo_log_likelihood: column count differs from site count");
  const Matrix x = normal_scores(u);
  const auto w = to_w_scale(m.factor(), u, x, true);
  return joint_log_sum(m, w.z, threads) - w.log_marginal;
}

inline double full_log_likelihood(const FactorCopulaModel& m, const MarginalModel& g, const Matrix& y, int threads = 1) {
  if (g.kind != MarginalKind::parametric_student_t) throw ConfigError("full_log_likelihood: needs a parametric margin");
  return pseudo_log_likelihood(m, parametric_transform(y, g), threads) + student_t_log_likelihood(y, g);
}

// Copula log-likelihood as a function of the natural parameter vector
// (theta_F, theta_Sigma[, m, sd, nu]), normalized per replicate.
class CopulaObjective {
 public:
  // data holds uniforms, or raw observations when `full` is set.
  CopulaObjective(FactorCopulaModel tmpl, Matrix data, bool full, int threads = 1)
      : tmpl_(std::move(tmpl)), data_(std::move(data)), full_(full), threads_(threads) {
    if (data_.cols() != tmpl_.size()) throw DimensionMismatch("CopulaObjective: data columns differ from site count");
    if (data_.rows() < 1) throw ConfigError("CopulaObjective: no replicates");
    n_f_ = tmpl_.factor().scales().size();
    n_s_ = tmpl_.corr().params().size();
    if (!full_) scores_ = normal_scores(data_);
  }

  std::size_t n_factor() const { return n_f_; }
  std::size_t n_sigma() const { return n_s_; }
  std::size_t dim() const { return n_f_ + n_s_ + (full_ ? 3 : 0); }
  bool full() const { return full_; }
  double replicates() const { return static_cast<double>(data_.rows()); }

  std::vector<std::string> names() const {
    auto n = tmpl_.factor().scale_names();
    for (const auto& s : CorrelationModel::parameter_names(tmpl_.corr().family())) n.push_back(s);
    if (full_) n.insert(n.end(), {"m", "sd", "nu"});
    return n;
  }

  bool has_analytic_gradient() const { return tmpl_.factor().exponential_closed_form() && dim() <= kMaxDual; }

  FactorCopulaModel model_at(const Vector& theta) const {
    return tmpl_.with_parameters(factor_part(theta), sigma_part(theta));
  }
  MarginalModel margin_at(const Vector& theta) const {
    if (!full_) return {};
    const auto b = static_cast<Eigen::Index>(n_f_ + n_s_);
    return MarginalModel::student_t(theta(b), theta(b + 1), theta(b + 2));
  }

  // Mean log-likelihood per replicate.
  double value(const Vector& theta) const {
    check(theta);
    const FactorCopulaModel m = model_at(theta);
    const auto& w = w_scale(theta, m.factor());
    double total = joint_log_sum(m, w.data.z, threads_) - w.data.log_marginal + w.log_margin;
    return total / replicates();
  }

  // Value and natural-parameter gradient through the closed-form exponential path.
  double value_and_gradient(const Vector& theta, Vector& grad) const {
    if (!has_analytic_gradient()) throw ConfigError("CopulaObjective: no analytic gradient for this model");
    check(theta);
    return analytic(theta, grad);
  }

 private:
  static constexpr std::size_t kMaxDual = 8;
  using D = Dual<kMaxDual>;

  struct CacheEntry {
    std::vector<double> key;
    WScaleData data;
    double log_margin = 0.0;
    bool has_derivatives = false;
    // Derivatives at fixed data, indexed by parameter position (Sigma slots left empty).
    std::vector<Matrix> dz;
    Vector dlog_marginal;
    Vector dlog_margin;
  };

  void check(const Vector& theta) const {
    if (static_cast<std::size_t>(theta.size()) != dim()) throw DimensionMismatch("CopulaObjective: wrong parameter count");
    if (!theta.allFinite()) throw DomainError("CopulaObjective: non-finite parameter");
  }
  std::vector<double> factor_part(const Vector& t) const { return {t.data(), t.data() + n_f_}; }
  std::vector<double> sigma_part(const Vector& t) const { return {t.data() + n_f_, t.data() + n_f_ + n_s_}; }
  bool is_sigma(std::size_t k) const { return k >= n_f_ && k < n_f_ + n_s_; }

  ExpMixture<D> dual_mixture(const FactorSpec& spec) const {
    const auto sc = spec.scales();
    const D t1 = D::variable(sc[0], 0);
    const D t2 = n_f_ > 1 ? D::variable(sc[1], 1) : D(1.0);
    return make_exp_mixture<D>(spec.has_pos(), spec.has_neg(), spec.has_pos() ? t1 : D(1.0),
                               spec.has_neg() ? (spec.has_pos() ? t2 : t1) : D(1.0));
  }

  const CacheEntry& w_scale(const Vector& theta, const FactorSpec& spec, bool with_derivatives = false) const {
    std::vector<double> key = factor_part(theta);
    if (full_) key.insert(key.end(), theta.data() + n_f_ + n_s_, theta.data() + theta.size());
    for (const auto& e : cache_)
      if (e.key == key && (!with_derivatives || e.has_derivatives)) return e;
    CacheEntry e;
    e.key = key;
    Matrix u;
    if (full_) {
      const MarginalModel g = margin_at(theta);
      u = parametric_transform(data_, g);
      e.data = to_w_scale(spec, u, normal_scores(u));
      e.log_margin = student_t_log_likelihood(data_, g);
    } else {
      e.data = to_w_scale(spec, data_, scores_);
    }
    if (with_derivatives) derivatives(theta, spec, full_ ? u : data_, e);
    cache_.push_front(std::move(e));
    if (cache_.size() > 12) cache_.pop_back();
    return cache_.front();
  }

  // At fixed data: dz/dtheta = -(dF/dtheta_F)/f for factor scales and (du/dtheta_G)/f for the
  // margin; also the matching derivatives of the marginal log density and Student-t sums.
  void derivatives(const Vector& theta, const FactorSpec& spec, const Matrix& u, CacheEntry& e) const {
    const std::size_t p = dim();
    const auto mix = dual_mixture(spec);
    const Matrix& z = e.data.z;
    e.dz.assign(p, Matrix());
    for (std::size_t k = 0; k < p; ++k)
      if (!is_sigma(k)) e.dz[k] = Matrix::Zero(z.rows(), z.cols());
    const std::size_t g0 = n_f_ + n_s_;
    MarginalModel g;
    boost::math::students_t_distribution<double> tdist(8.0);
    if (full_) {
      g = margin_at(theta);
      tdist = boost::math::students_t_distribution<double>(g.nu);
    }
    std::vector<NeumaierSum> acc(p);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const auto em = exp_marginal(D(z(i)), mix);
      const double f = std::exp(em.log_pdf.val);
      D zd(z(i));
      for (std::size_t k = 0; k < n_f_; ++k) zd.d[k] = -em.cdf.d[k] / f;
      if (full_) {
        const double s = g.scale();
        const double t = (data_(i) - g.m) / s;
        const double dens = boost::math::pdf(tdist, t) / s;
        zd.d[g0] = -dens / f;
        zd.d[g0 + 1] = -dens * (data_(i) - g.m) / g.sd / f;
        zd.d[g0 + 2] = detail::student_t_dnu(data_(i), g) / f;
      }
      for (std::size_t k = 0; k < p; ++k)
        if (!is_sigma(k)) e.dz[k](i) = zd.d[k];
      const auto lp = exp_marginal(zd, mix).log_pdf;
      for (std::size_t k = 0; k < p; ++k) acc[k].add(lp.d[k]);
    }
    e.dlog_marginal = Vector::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t k = 0; k < p; ++k) e.dlog_marginal(static_cast<Eigen::Index>(k)) = acc[k].value();
    e.dlog_margin = Vector::Zero(static_cast<Eigen::Index>(p));
    if (full_) {
      const Vector dg = student_t_log_likelihood_gradient(data_, g);
      e.dlog_margin.tail(3) = dg;
    }
    e.has_derivatives = true;
  }

  double analytic(const Vector& theta, Vector& grad) const {
    const FactorCopulaModel m = model_at(theta);
    const auto& e = w_scale(theta, m.factor(), true);
    const std::size_t p = dim();
    const Matrix& z = e.data.z;
    const Eigen::Index n = m.size();
    const Eigen::Index nr = z.rows();
    const SpdMatrix& sig = m.sigma_z();
    const Vector& g = m.ones_solved();
    const Matrix r = sig.solve(Matrix(z.transpose()));  // n x N
    const Vector b = z * g;
    const Vector c = (z.transpose().array() * r.array()).colwise().sum().transpose();

    const Matrix dist = distance_matrix(m.locations());
    std::vector<Matrix> dsig(n_s_, Matrix::Zero(n, n));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < i; ++j) {
        const auto gr = m.corr().gradient(dist(i, j));
        for (std::size_t k = 0; k < n_s_; ++k) dsig[k](i, j) = dsig[k](j, i) = gr[k];
      }
    const Matrix sinv = sig.inverse();

    D a(m.a());
    D logdet(sig.logdet());
    std::vector<Vector> db(p, Vector::Zero(nr));
    std::vector<Vector> dc(p, Vector::Zero(nr));
    for (std::size_t k = 0; k < p; ++k) {
      if (is_sigma(k)) {
        const Matrix& ds = dsig[k - n_f_];
        const Vector dg = ds * g;
        logdet.d[k] = (sinv.array() * ds.array()).sum();
        a.d[k] = -g.dot(dg);
        db[k] = -(r.transpose() * dg);
        const Matrix dr = ds * r;
        dc[k] = -(r.array() * dr.array()).colwise().sum().transpose().matrix();
      } else {
        db[k] = e.dz[k] * g;
        dc[k] = 2.0 * (e.dz[k].array() * r.transpose().array()).rowwise().sum().matrix();
      }
    }

    const auto mix = dual_mixture(m.factor());
    const double norm = -static_cast<double>(n) * kLogSqrt2Pi;
    std::vector<D> terms(static_cast<std::size_t>(nr));
    parallel_for(terms.size(), threads_, [&](std::size_t ii) {
      const auto i = static_cast<Eigen::Index>(ii);
      D bi(b(i));
      D ci(c(i));
      for (std::size_t k = 0; k < p; ++k) {
        bi.d[k] = db[k](i);
        ci.d[k] = dc[k](i);
      }
      terms[ii] = norm - 0.5 * logdet - 0.5 * ci + exp_log_kernel_integral(a, bi, mix);
    });
    NeumaierSum val;
    std::vector<NeumaierSum> gs(p);
    for (const auto& t : terms) {
      val.add(t.val);
      for (std::size_t k = 0; k < p; ++k) gs[k].add(t.d[k]);
    }
    grad.resize(static_cast<Eigen::Index>(p));
    for (std::size_t k = 0; k < p; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      grad(kk) = (gs[k].value() - e.dlog_marginal(kk) + e.dlog_margin(kk)) / replicates();
    }
    return (val.value() - e.data.log_marginal + e.log_margin) / replicates();
  }

  FactorCopulaModel tmpl_;
  Matrix data_;
  bool full_;
  int threads_;
  std::size_t n_f_ = 0;
  std::size_t n_s_ = 0;
  Matrix scores_;
  mutable std::deque<CacheEntry> cache_;
};

}  // namespace fcop
