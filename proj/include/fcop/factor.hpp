#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "fcop/error.hpp"
#include "fcop/numerics/dual.hpp"
#include "fcop/numerics/normal.hpp"
#include "fcop/numerics/quadrature.hpp"
#include "fcop/numerics/roots.hpp"

namespace fcop {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerances for integrals whose values are reused inside likelihoods.
inline QuadratureConfig tight_quadrature() { return {1e-250, 1e-12, 2000}; }

// Uniform draw on the open interval (0,1).
template <class Rng>
double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

enum class FactorFamily { exponential, pareto, weibull, degenerate_zero };

inline std::string to_string(FactorFamily f) {
  switch (f) {
    case FactorFamily::exponential: return "exponential";
    case FactorFamily::pareto: return "pareto";
    case FactorFamily::weibull: return "weibull";
    case FactorFamily::degenerate_zero: return "degenerate_zero";
  }
  return "?";
}

inline FactorFamily factor_family_from_string(const std::string& s) {
  if (s == "exponential") return FactorFamily::exponential;
  if (s == "pareto") return FactorFamily::pareto;
  if (s == "weibull") return FactorFamily::weibull;
  if (s == "degenerate_zero") return FactorFamily::degenerate_zero;
  throw ConfigError("unknown factor family '" + s + "'");
}

// Nonnegative factor component.
//   exponential(theta): S(v) = exp(-theta v)
//   pareto(theta, beta): S(v) = (v/theta)^-beta on v >= theta
//   weibull(theta, alpha): S(v) = exp(-theta v^alpha)
class OneSidedFactor {
 public:
  OneSidedFactor() = default;

  static OneSidedFactor exponential(double theta) { return {FactorFamily::exponential, theta, 1.0}; }
  static OneSidedFactor pareto(double theta, double beta) { return {FactorFamily::pareto, theta, beta}; }
  static OneSidedFactor weibull(double theta, double alpha) { return {FactorFamily::weibull, theta, alpha}; }
  static OneSidedFactor degenerate_zero() { return {}; }

  OneSidedFactor(FactorFamily family, double theta, double shape) : family_(family), theta_(theta), shape_(shape) {
    if (family_ == FactorFamily::degenerate_zero) return;
    if (!(theta_ > 0.0) || !std::isfinite(theta_)) throw DomainError(to_string(family_) + " factor: theta must be positive");
    if (!(shape_ > 0.0) || !std::isfinite(shape_)) throw DomainError(to_string(family_) + " factor: shape must be positive");
  }

  FactorFamily family() const { return family_; }
  double theta() const { return theta_; }
  double shape() const { return shape_; }
  bool degenerate() const { return family_ == FactorFamily::degenerate_zero; }
  OneSidedFactor with_theta(double t) const { return degenerate() ? *this : OneSidedFactor(family_, t, shape_); }

  double lower_bound() const { return family_ == FactorFamily::pareto ? theta_ : 0.0; }

  double survival(double v) const {
    if (v < lower_bound()) return 1.0;
    switch (family_) {
      case FactorFamily::exponential: return std::exp(-theta_ * v);
      case FactorFamily::pareto: return std::pow(v / theta_, -shape_);
      case FactorFamily::weibull: return std::exp(-theta_ * std::pow(v, shape_));
      case FactorFamily::degenerate_zero: return 0.0;
    }
    return 0.0;
  }

  double cdf(double v) const {
    if (v < lower_bound()) return 0.0;
    switch (family_) {
      case FactorFamily::exponential: return -std::expm1(-theta_ * v);
      case FactorFamily::pareto: return -std::expm1(-shape_ * std::log(v / theta_));
      case FactorFamily::weibull: return -std::expm1(-theta_ * std::pow(v, shape_));
      case FactorFamily::degenerate_zero: return 1.0;
    }
    return 1.0;
  }

  // Density; a point mass has none and reports 0.
  double pdf(double v) const {
    if (v < lower_bound() || degenerate()) return 0.0;
    switch (family_) {
      case FactorFamily::exponential: return theta_ * std::exp(-theta_ * v);
      case FactorFamily::pareto: return shape_ / theta_ * std::pow(v / theta_, -shape_ - 1.0);
      case FactorFamily::weibull:
        if (v == 0.0) return shape_ < 1.0 ? kInf : (shape_ == 1.0 ? theta_ : 0.0);
        return theta_ * shape_ * std::pow(v, shape_ - 1.0) * std::exp(-theta_ * std::pow(v, shape_));
      default: return 0.0;
    }
  }

  // x with survival(x) = q, q in (0,1].
  double survival_quantile(double q) const {
    switch (family_) {
      case FactorFamily::exponential: return -std::log(q) / theta_;
      case FactorFamily::pareto: return theta_ * std::pow(q, -1.0 / shape_);
      case FactorFamily::weibull: return std::pow(-std::log(q) / theta_, 1.0 / shape_);
      case FactorFamily::degenerate_zero: return 0.0;
    }
    return 0.0;
  }

  double mean() const {
    switch (family_) {
      case FactorFamily::exponential: return 1.0 / theta_;
      case FactorFamily::pareto: return shape_ > 1.0 ? shape_ * theta_ / (shape_ - 1.0) : kInf;
      case FactorFamily::weibull: return std::pow(theta_, -1.0 / shape_) * std::tgamma(1.0 + 1.0 / shape_);
      case FactorFamily::degenerate_zero: return 0.0;
    }
    return 0.0;
  }

  std::optional<double> variance() const {
    switch (family_) {
      case FactorFamily::exponential: return 1.0 / (theta_ * theta_);
      case FactorFamily::pareto:
        if (shape_ <= 2.0) return std::nullopt;
        return theta_ * theta_ * shape_ / ((shape_ - 1.0) * (shape_ - 1.0) * (shape_ - 2.0));
      case FactorFamily::weibull: {
        const double g1 = std::tgamma(1.0 + 1.0 / shape_);
        return std::pow(theta_, -2.0 / shape_) * (std::tgamma(1.0 + 2.0 / shape_) - g1 * g1);
      }
      case FactorFamily::degenerate_zero: return 0.0;
    }
    return std::nullopt;
  }

  template <class Rng>
  double sample(Rng& rng) const {
    if (degenerate()) return 0.0;
    return survival_quantile(uniform_open(rng));
  }

 private:
  FactorFamily family_ = FactorFamily::degenerate_zero;
  double theta_ = 0.0;
  double shape_ = 0.0;
};

enum class FactorForm { one_sided, difference };

// Two-branch exponential law: with weight wpos V0 ~ +Exp(rpos), with weight wneg V0 ~ -Exp(rneg).
template <class T>
struct ExpMixture {
  T wpos{0.0};
  T rpos{1.0};
  T wneg{0.0};
  T rneg{1.0};
  bool has_pos = false;
  bool has_neg = false;
};

template <class T>
ExpMixture<T> make_exp_mixture(bool has_pos, bool has_neg, const T& theta1, const T& theta2) {
  ExpMixture<T> m;
  m.has_pos = has_pos;
  m.has_neg = has_neg;
  if (has_pos) m.rpos = theta1;
  if (has_neg) m.rneg = theta2;
  if (has_pos && has_neg) {
    m.wpos = theta2 / (theta1 + theta2);
    m.wneg = theta1 / (theta1 + theta2);
  } else if (has_pos) {
    m.wpos = T(1.0);
  } else if (has_neg) {
    m.wneg = T(1.0);
  }
  return m;
}

// Closed-form marginal of W = Z + V0 for an exponential mixture factor.
template <class T>
struct ExpMarginal {
  T cdf;
  T sf;
  T log_pdf;
};

template <class T>
ExpMarginal<T> exp_marginal(const T& w, const ExpMixture<T>& m) {
  using std::exp;
  using std::log;
  const T log_phi = -0.5 * w * w - kLogSqrt2Pi;
  T cdf = std_normal_cdf(w);
  T sf = std_normal_cdf(-w);
  T log_dens{-kInf};
  bool have = false;
  if (m.has_pos) {
    const T lm = log_mills(w - m.rpos);
    const T t = m.wpos * exp(log_phi + lm);
    cdf = cdf - t;
    sf = sf + t;
    log_dens = log(m.wpos * m.rpos) + lm;
    have = true;
  }
  if (m.has_neg) {
    const T lm = log_mills(-w - m.rneg);
    const T t = m.wneg * exp(log_phi + lm);
    cdf = cdf + t;
    sf = sf - t;
    const T ld = log(m.wneg * m.rneg) + lm;
    log_dens = have ? log_add_exp(log_dens, ld) : ld;
    have = true;
  }
  if (!have) log_dens = T(0.0) * w;
  return {cdf, sf, log_phi + log_dens};
}

// log of int exp(b v - a v^2 / 2) dF_V0(v) for an exponential mixture factor.
template <class T>
T exp_log_kernel_integral(const T& a, const T& b, const ExpMixture<T>& m) {
  using std::log;
  using std::sqrt;
  const T sa = sqrt(a);
  T acc{0.0};
  bool have = false;
  if (m.has_pos) {
    acc = log(m.wpos * m.rpos) + log_mills((b - m.rpos) / sa);
    have = true;
  }
  if (m.has_neg) {
    const T t = log(m.wneg * m.rneg) + log_mills(-(b + m.rneg) / sa);
    acc = have ? log_add_exp(acc, t) : t;
    have = true;
  }
  if (!have) return T(0.0) * a;
  return acc - 0.5 * log(a);
}

class FactorSpec;

namespace detail {

// Spline cache of log pdf / log cdf (left of the kink) / log survival (right of the kink)
// for V0 = V1 - V2 when no closed form exists.
class ConvolutionTable {
 public:
  friend struct ConvolutionTableProbe;
  ConvolutionTable(const OneSidedFactor& v1, const OneSidedFactor& v2, int nodes_per_side = 2048);

  double kink() const { return kink_; }
  double pdf(double v) const;
  double cdf(double v) const;
  double survival(double v) const;

  double exact_pdf(double v) const;
  double exact_cdf_left(double v) const;      // valid for v <= kink
  double exact_survival_right(double v) const;  // valid for v >= kink

 private:
  struct Side {
    double t0 = 0.0;
    double h = 1.0;
    double tmax = 0.0;
    std::vector<double> log_pdf;
    std::vector<double> log_prob;
    std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> pdf_spline;
    std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> prob_spline;
  };
  void build_side(Side& s, bool right, double delta_max, int nodes);
  double lookup(const Side& s, double delta, bool want_pdf, bool right) const;

  OneSidedFactor v1_;
  OneSidedFactor v2_;
  double kink_;
  Side left_;
  Side right_;
};

}  // namespace detail

class FactorSpec {
 public:
  FactorSpec() = default;  // degenerate

  static FactorSpec one_sided(OneSidedFactor v1) { return FactorSpec(FactorForm::one_sided, v1, {}); }
  static FactorSpec difference(OneSidedFactor v1, OneSidedFactor v2) {
    return FactorSpec(FactorForm::difference, v1, v2);
  }
  static FactorSpec gaussian() { return {}; }
  static FactorSpec exponential_difference(double theta1, double theta2) {
    return difference(OneSidedFactor::exponential(theta1), OneSidedFactor::exponential(theta2));
  }

  FactorSpec(FactorForm form, OneSidedFactor v1, OneSidedFactor v2)
      : form_(form), v1_(v1), v2_(form == FactorForm::difference ? v2 : OneSidedFactor{}) {
    if (has_pos() && has_neg() && !exponential_closed_form())
      table_ = std::make_shared<detail::ConvolutionTable>(v1_, v2_);
  }

  FactorForm form() const { return form_; }
  const OneSidedFactor& v1() const { return v1_; }
  const OneSidedFactor& v2() const { return v2_; }
  bool has_pos() const { return !v1_.degenerate(); }
  bool has_neg() const { return !v2_.degenerate(); }
  bool is_degenerate() const { return !has_pos() && !has_neg(); }

  bool exponential_closed_form() const {
    if (is_degenerate()) return false;
    return (!has_pos() || v1_.family() == FactorFamily::exponential) &&
           (!has_neg() || v2_.family() == FactorFamily::exponential);
  }

  ExpMixture<double> exp_mixture() const {
    return make_exp_mixture(has_pos(), has_neg(), has_pos() ? v1_.theta() : 1.0, has_neg() ? v2_.theta() : 1.0);
  }

  // Free scale parameters (theta of each nondegenerate slot).
  std::vector<double> scales() const {
    std::vector<double> s;
    if (has_pos()) s.push_back(v1_.theta());
    if (has_neg()) s.push_back(v2_.theta());
    return s;
  }
  std::vector<std::string> scale_names() const {
    std::vector<std::string> s;
    if (has_pos()) s.push_back("theta_1");
    if (has_neg()) s.push_back("theta_2");
    return s;
  }
  FactorSpec with_scales(const std::vector<double>& s) const {
    if (s.size() != scales().size()) throw DimensionMismatch("FactorSpec::with_scales: wrong parameter count");
    std::size_t k = 0;
    OneSidedFactor a = v1_;
    OneSidedFactor b = v2_;
    if (has_pos()) a = a.with_theta(s[k++]);
    if (has_neg()) b = b.with_theta(s[k++]);
    return FactorSpec(form_, a, b);
  }

  // Point where the law of V0 is not smooth.
  double kink() const {
    if (is_degenerate()) return 0.0;
    return (has_pos() ? v1_.lower_bound() : 0.0) - (has_neg() ? v2_.lower_bound() : 0.0);
  }
  double support_lo() const { return has_neg() ? -kInf : (is_degenerate() ? 0.0 : v1_.lower_bound()); }
  double support_hi() const { return has_pos() ? kInf : (is_degenerate() ? 0.0 : -v2_.lower_bound()); }

  double pdf(double v) const {
    if (is_degenerate()) return 0.0;
    if (exponential_closed_form()) {
      const auto m = exp_mixture();
      if (v >= 0.0) return m.has_pos ? m.wpos * m.rpos * std::exp(-m.rpos * v) : (v == 0.0 ? m.wneg * m.rneg : 0.0);
      return m.has_neg ? m.wneg * m.rneg * std::exp(m.rneg * v) : 0.0;
    }
    if (!has_neg()) return v1_.pdf(v);
    if (!has_pos()) return v2_.pdf(-v);
    return table_->pdf(v);
  }

  double cdf(double v) const {
    if (is_degenerate()) return v >= 0.0 ? 1.0 : 0.0;
    if (exponential_closed_form()) {
      const auto m = exp_mixture();
      if (v >= 0.0) return 1.0 - (m.has_pos ? m.wpos * std::exp(-m.rpos * v) : 0.0);
      return m.has_neg ? m.wneg * std::exp(m.rneg * v) : 0.0;
    }
    if (!has_neg()) return v1_.cdf(v);
    if (!has_pos()) return v2_.survival(-v);
    return table_->cdf(v);
  }

  double survival(double v) const {
    if (is_degenerate()) return v >= 0.0 ? 0.0 : 1.0;
    if (exponential_closed_form()) {
      const auto m = exp_mixture();
      if (v >= 0.0) return m.has_pos ? m.wpos * std::exp(-m.rpos * v) : 0.0;
      return 1.0 - (m.has_neg ? m.wneg * std::exp(m.rneg * v) : 0.0);
    }
    if (!has_neg()) return v1_.survival(v);
    if (!has_pos()) return v2_.cdf(-v);
    return table_->survival(v);
  }

  double mean() const { return (has_pos() ? v1_.mean() : 0.0) - (has_neg() ? v2_.mean() : 0.0); }

  std::optional<double> variance() const {
    double v = 0.0;
    for (const auto* c : {&v1_, &v2_}) {
      const auto cv = c->variance();
      if (!cv) return std::nullopt;
      v += *cv;
    }
    return v;
  }

  template <class Rng>
  double sample(Rng& rng) const {
    const double a = v1_.sample(rng);
    const double b = v2_.sample(rng);
    return a - b;
  }

 private:
  FactorForm form_ = FactorForm::one_sided;
  OneSidedFactor v1_;
  OneSidedFactor v2_;
  std::shared_ptr<const detail::ConvolutionTable> table_;
};

inline double factor_cdf(const FactorSpec& s, double v) { return s.cdf(v); }
inline double factor_pdf(const FactorSpec& s, double v) { return s.pdf(v); }
inline double factor_survival(const FactorSpec& s, double v) { return s.survival(v); }
inline double factor_variance(const FactorSpec& s) {
  const auto v = s.variance();
  if (!v) throw UnsupportedVariance("factor variance does not exist (Pareto shape <= 2)");
  return *v;
}
template <class Rng>
double sample_factor(const FactorSpec& s, Rng& rng) {
  return s.sample(rng);
}

// ---------------------------------------------------------------------------
// Convolution table implementation.

namespace detail {

inline ConvolutionTable::ConvolutionTable(const OneSidedFactor& v1, const OneSidedFactor& v2, int nodes)
    : v1_(v1), v2_(v2), kink_(v1.lower_bound() - v2.lower_bound()) {
  const double tiny = 1e-25;
  const double right_max = std::max(100.0, 2.0 * (v1_.survival_quantile(tiny) - v1_.lower_bound()));
  const double left_max = std::max(100.0, 2.0 * (v2_.survival_quantile(tiny) - v2_.lower_bound()));
  build_side(left_, false, left_max, nodes);
  build_side(right_, true, right_max, nodes);
}

// Integral over (0,1) at tight tolerance; accepts an unconverged estimate whose bound is still small.
template <class G>
double unit_integral(G&& g) {
  try {
    return integrate_real_line(g, 0.0, 1.0, tight_quadrature()).value;
  } catch (const QuadratureError& e) {
    if (std::isfinite(e.estimate()) && e.error_bound() <= 1e-9 * std::abs(e.estimate())) return e.estimate();
    throw;
  }
}

// Right of the kink integrate over the survival quantile of V2, left of it over that of V1,
// so the arguments of the integrands are sums of nonnegative terms.
inline double ConvolutionTable::exact_pdf(double v) const {
  if (v >= kink_) return unit_integral([&](double q) { return v1_.pdf(v + v2_.survival_quantile(q)); });
  return unit_integral([&](double q) { return v2_.pdf(v1_.survival_quantile(q) - v); });
}

inline double ConvolutionTable::exact_cdf_left(double v) const {
  return unit_integral([&](double q) { return v2_.survival(v1_.survival_quantile(q) - v); });
}

inline double ConvolutionTable::exact_survival_right(double v) const {
  return unit_integral([&](double q) { return v1_.survival(v + v2_.survival_quantile(q)); });
}

inline void ConvolutionTable::build_side(Side& s, bool right, double delta_max, int nodes) {
  const double tmin = std::log(1e-10);
  const double tmax = std::log(delta_max);
  s.t0 = tmin;
  s.tmax = tmax;
  s.h = (tmax - tmin) / (nodes - 1);
  s.log_pdf.resize(nodes);
  s.log_prob.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double delta = std::exp(tmin + i * s.h);
    const double v = right ? kink_ + delta : kink_ - delta;
    const double p = exact_pdf(v);
    const double c = right ? exact_survival_right(v) : exact_cdf_left(v);
    s.log_pdf[i] = std::log(std::max(p, 1e-300));
    s.log_prob[i] = std::log(std::max(c, 1e-300));
  }
  using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
  s.pdf_spline = std::make_unique<Spline>(s.log_pdf.begin(), s.log_pdf.end(), s.t0, s.h);
  s.prob_spline = std::make_unique<Spline>(s.log_prob.begin(), s.log_prob.end(), s.t0, s.h);
}

inline double ConvolutionTable::lookup(const Side& s, double delta, bool want_pdf, bool right) const {
  const double t = std::log(delta);
  if (t <= s.t0) return std::exp(want_pdf ? s.log_pdf.front() : s.log_prob.front());
  if (t >= s.tmax) {
    const double v = right ? kink_ + delta : kink_ - delta;
    if (want_pdf) return exact_pdf(v);
    return right ? exact_survival_right(v) : exact_cdf_left(v);
  }
  return std::exp(want_pdf ? (*s.pdf_spline)(t) : (*s.prob_spline)(t));
}

inline double ConvolutionTable::pdf(double v) const {
  if (v >= kink_) return lookup(right_, v - kink_, true, true);
  return lookup(left_, kink_ - v, true, false);
}

inline double ConvolutionTable::cdf(double v) const {
  if (v >= kink_) return 1.0 - lookup(right_, v - kink_, false, true);
  return lookup(left_, kink_ - v, false, false);
}

inline double ConvolutionTable::survival(double v) const {
  if (v >= kink_) return lookup(right_, v - kink_, false, true);
  return 1.0 - lookup(left_, kink_ - v, false, false);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Marginal law of W1 = Z1 + V0.

namespace detail {

// E_Z[g(w - Z)] restricted to where the factor law is supported.
template <class G>
double gauss_smooth(const FactorSpec& s, double w, G&& g) {
  auto h = [&](double z) {
    const double p = std_normal_pdf(z);
    if (p == 0.0) return 0.0;
    // Rounding can land exactly on an integrable pole of the factor density.
    const double r = p * g(w - z);
    return std::isfinite(r) ? r : 0.0;
  };
  const double lo = s.support_lo();
  const double hi = s.support_hi();
  // v = w - z in [lo, hi] <=> z in [w - hi, w - lo]; phi(z) underflows beyond |z| = 38.5.
  const double zlo = std::isinf(hi) ? -38.5 : std::max(-38.5, w - hi);
  const double zhi = std::isinf(lo) ? 38.5 : std::min(38.5, w - lo);
  if (!(zlo < zhi)) return 0.0;
  std::vector<double> bp;
  for (double b : {-8.0, -3.0, 0.0, 3.0, 8.0})
    if (b > zlo && b < zhi) bp.push_back(b);
  std::sort(bp.begin(), bp.end());
  QuadratureConfig cfg = tight_quadrature();
  cfg.rel_tol = 1e-10;
  return integrate_with_singular_point(h, zlo, zhi, w - s.kink(), cfg, bp).value;
}

}  // namespace detail

inline double marginal_pdf_w(const FactorSpec& s, double w) {
  if (!std::isfinite(w)) throw DomainError("marginal_pdf_w: w must be finite");
  if (s.is_degenerate()) return std_normal_pdf(w);
  if (s.exponential_closed_form()) return std::exp(exp_marginal(w, s.exp_mixture()).log_pdf);
  return detail::gauss_smooth(s, w, [&](double v) { return s.pdf(v); });
}

inline double log_marginal_pdf_w(const FactorSpec& s, double w) {
  if (s.is_degenerate()) return -0.5 * w * w - kLogSqrt2Pi;
  if (s.exponential_closed_form()) return exp_marginal(w, s.exp_mixture()).log_pdf;
  return std::log(marginal_pdf_w(s, w));
}

inline double marginal_cdf_w(const FactorSpec& s, double w) {
  if (!std::isfinite(w)) throw DomainError("marginal_cdf_w: w must be finite");
  if (s.is_degenerate()) return std_normal_cdf(w);
  if (s.exponential_closed_form()) return exp_marginal(w, s.exp_mixture()).cdf;
  // Mass of Z beyond the support contributes Phi terms.
  double extra = 0.0;
  if (!s.has_neg()) {
    // V0 >= lo: F(w - z) = 0 for z > w - lo.
  } else if (!s.has_pos()) {
    extra = std_normal_cdf(w - s.support_hi());  // z < w - hi gives F = 1
  }
  return extra + detail::gauss_smooth(s, w, [&](double v) { return s.cdf(v); });
}

inline double marginal_sf_w(const FactorSpec& s, double w) {
  if (!std::isfinite(w)) throw DomainError("marginal_sf_w: w must be finite");
  if (s.is_degenerate()) return std_normal_cdf(-w);
  if (s.exponential_closed_form()) return exp_marginal(w, s.exp_mixture()).sf;
  double extra = 0.0;
  if (!s.has_neg()) extra = std_normal_cdf(s.support_lo() - w);  // z > w - lo gives S = 1
  return extra + detail::gauss_smooth(s, w, [&](double v) { return s.survival(v); });
}

struct MarginalMoments {
  double mean;
  double sd;
};

inline MarginalMoments marginal_moments(const FactorSpec& s) {
  const auto var = s.variance();
  const double mean = s.mean();
  if (var && std::isfinite(mean)) return {mean, std::sqrt(1.0 + *var)};
  // Heavy tails: a robust location/scale from the components.
  double loc = 0.0;
  if (s.has_pos()) loc += s.v1().survival_quantile(0.5);
  if (s.has_neg()) loc -= s.v2().survival_quantile(0.5);
  return {loc, 3.0};
}

inline double marginal_quantile_w(const FactorSpec& s, double p, double start = kInf) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("marginal_quantile_w: p must lie in (0,1)");
  if (s.is_degenerate()) return std_normal_quantile(p);
  const auto mom = marginal_moments(s);
  const Bracket br{mom.mean - 10.0 * mom.sd, mom.mean + 10.0 * mom.sd};
  auto pdf = [&](double w) { return marginal_pdf_w(s, w); };
  const double x0 = std::isfinite(start) ? start : mom.mean + mom.sd * std_normal_quantile(p);
  RootOptions opt;
  opt.f_tol = 1e-13;
  if (p <= 0.5) return invert_monotone_cdf([&](double w) { return marginal_cdf_w(s, w); }, pdf, p, br, x0, opt);
  return invert_monotone_cdf([&](double w) { return 1.0 - marginal_sf_w(s, w); }, pdf, p, br, x0, opt);
}

}  // namespace fcop
