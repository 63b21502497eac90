#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fcop/factor.hpp"

using namespace fcop;

namespace {

constexpr double kInfty = std::numeric_limits<double>::infinity();

FactorSpec model1() { return FactorSpec::exponential_difference(1.7, 3.0); }
FactorSpec model2() { return FactorSpec::difference(OneSidedFactor::pareto(1.5, 4), OneSidedFactor::pareto(1.0, 5)); }
FactorSpec model3() { return FactorSpec::difference(OneSidedFactor::weibull(3, 0.8), OneSidedFactor::weibull(2.5, 0.6)); }

// Example 2 density of V1 - V2 with exponential components, written out directly.
double exp_difference_pdf(double v, double t1, double t2) {
  const double c = t1 * t2 / (t1 + t2);
  return v >= 0 ? c * std::exp(-t1 * v) : c * std::exp(t2 * v);
}

double ks_statistic(std::vector<double> x, const FactorSpec& s) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = s.cdf(x[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

}  // namespace

TEST(Factor, CdfExamples) {
  EXPECT_NEAR(factor_cdf(FactorSpec::exponential_difference(2.0, 2.0), 0.0), 0.5, 1e-15);
  EXPECT_NEAR(factor_cdf(model1(), 0.0), 1.0 - 3.0 / 4.7, 1e-12);
  EXPECT_NEAR(factor_cdf(model1(), 0.0), 0.361702, 1e-6);
  // Example 2 form exp{-t2 (-v)+} {1 - t2 exp(-t1 v+)/(t1+t2)}.
  for (double v : {-2.0, -0.3, 0.4, 1.9}) {
    const double ex = std::exp(-3.0 * std::max(-v, 0.0)) * (1.0 - 3.0 * std::exp(-1.7 * std::max(v, 0.0)) / 4.7);
    EXPECT_NEAR(factor_cdf(model1(), v), ex, 1e-14);
  }
}

TEST(Factor, ParetoDifferenceCdfMatchesMonteCarlo) {
  const FactorSpec s = model2();
  std::mt19937_64 rng(11);
  std::vector<double> x(1000000);
  for (auto& v : x) v = s.sample(rng);
  std::sort(x.begin(), x.end());
  for (double v : {-3.0, -1.5, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0}) {
    const double emp = static_cast<double>(std::upper_bound(x.begin(), x.end(), v) - x.begin()) / x.size();
    EXPECT_NEAR(factor_cdf(s, v), emp, 0.003) << v;
  }
}

TEST(Factor, PdfAndSurvivalExamples) {
  const auto w1 = FactorSpec::one_sided(OneSidedFactor::weibull(1.3, 1.0));
  for (double v : {0.1, 1.0, 4.0}) EXPECT_NEAR(factor_survival(w1, v), std::exp(-1.3 * v), 1e-15);
  const double c = 1.7 * 3.0 / 4.7;
  EXPECT_NEAR(factor_pdf(model1(), 0.0), c, 1e-15);
  EXPECT_NEAR(factor_pdf(model1(), -1e-12), c, 1e-10);
  EXPECT_NEAR(factor_pdf(model1(), 1e-12), c, 1e-10);
  EXPECT_NEAR(factor_survival(FactorSpec::one_sided(OneSidedFactor::pareto(0.8, 3)), 1.6), 0.125, 1e-15);
}

TEST(Factor, DensitiesIntegrateToOne) {
  const std::vector<FactorSpec> specs = {
      model1(),
      model2(),
      model3(),
      FactorSpec::one_sided(OneSidedFactor::exponential(1.7)),
      FactorSpec::one_sided(OneSidedFactor::pareto(0.8, 3)),
      FactorSpec::one_sided(OneSidedFactor::weibull(3, 0.8)),
      FactorSpec::difference(OneSidedFactor::degenerate_zero(), OneSidedFactor::weibull(1.0, 1.5)),
      FactorSpec::difference(OneSidedFactor::pareto(0.8, 3), OneSidedFactor::pareto(2.5, 5)),
  };
  for (const auto& s : specs) {
    const double bp[] = {s.kink()};
    const double total =
        integrate_real_line([&](double v) { return s.pdf(v); }, s.support_lo(), s.support_hi(), tight_quadrature(), bp)
            .value;
    EXPECT_NEAR(total, 1.0, 1e-7);
  }
}

TEST(Factor, SurvivalComplementsCdf) {
  for (const auto& s : {model1(), model2(), model3()})
    for (double v = -15.0; v <= 15.0; v += 0.173) EXPECT_NEAR(s.survival(v), 1.0 - s.cdf(v), 1e-12) << v;
}

TEST(Factor, VarianceExamples) {
  EXPECT_DOUBLE_EQ(factor_variance(FactorSpec::exponential_difference(1, 1)), 2.0);
  EXPECT_DOUBLE_EQ(factor_variance(FactorSpec::gaussian()), 0.0);
  EXPECT_NEAR(factor_variance(FactorSpec::one_sided(OneSidedFactor::weibull(1, 1))), 1.0, 1e-14);
  EXPECT_THROW(factor_variance(FactorSpec::one_sided(OneSidedFactor::pareto(1, 2))), UnsupportedVariance);
  EXPECT_NEAR(factor_variance(model2()), 1.5 * 1.5 * 4 / (9.0 * 2) + 5.0 / (16.0 * 3), 1e-14);
}

TEST(Factor, SamplingExamples) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_factor(FactorSpec::gaussian(), rng), 0.0);
  const auto e = FactorSpec::one_sided(OneSidedFactor::exponential(2.5));
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += sample_factor(e, rng);
  EXPECT_NEAR(sum / n / 0.4, 1.0, 0.005);
  const auto sym = FactorSpec::exponential_difference(1.3, 1.3);
  const int m = 4000000;
  double m1 = 0, m2 = 0, m3 = 0;
  for (int i = 0; i < m; ++i) {
    const double v = sample_factor(sym, rng);
    m1 += v;
    m2 += v * v;
    m3 += v * v * v;
  }
  m1 /= m;
  m2 /= m;
  m3 /= m;
  const double var = m2 - m1 * m1;
  const double skew = (m3 - 3 * m1 * m2 + 2 * m1 * m1 * m1) / std::pow(var, 1.5);
  EXPECT_NEAR(skew, 0.0, 0.01);
}

TEST(Factor, SamplesPassKolmogorovSmirnov) {
  for (const auto& s : {model1(), model2(), model3()}) {
    std::mt19937_64 rng(21);
    std::vector<double> x(100000);
    for (auto& v : x) v = s.sample(rng);
    EXPECT_LT(ks_statistic(x, s), 0.006);
  }
}

TEST(Factor, MarginalCdfExamples) {
  for (double w : {-3.0, 0.0, 1.4}) EXPECT_DOUBLE_EQ(marginal_cdf_w(FactorSpec::gaussian(), w), std_normal_cdf(w));
  EXPECT_NEAR(marginal_cdf_w(FactorSpec::one_sided(OneSidedFactor::exponential(1000)), 0.0), 0.5, 1e-3);
  // Example 1 (alpha = 1) closed form.
  const double th = 1.7;
  for (double w : {-2.0, 0.5, 3.0}) {
    const double ex = std_normal_cdf(w) - std::exp(th * th / 2 - th * w) * std_normal_cdf(w - th);
    EXPECT_NEAR(marginal_cdf_w(FactorSpec::one_sided(OneSidedFactor::exponential(th)), w), ex, 1e-12);
  }
}

TEST(Factor, ExponentialDifferenceClosedFormMatchesQuadrature) {
  const FactorSpec s = model1();
  for (double w = -6.0; w <= 8.0; w += 0.25) {
    // int Phi(w - v) dF(v) with the Example 2 density.
    const double bp[] = {0.0};
    const double oracle = integrate_real_line(
                              [&](double v) { return std_normal_cdf(w - v) * exp_difference_pdf(v, 1.7, 3.0); },
                              -kInfty, kInfty, {1e-15, 1e-13, 1000}, bp)
                              .value;
    EXPECT_NEAR(marginal_cdf_w(s, w), oracle, 1e-9) << w;
    const double pdf_oracle = integrate_real_line(
                                  [&](double v) { return std_normal_pdf(w - v) * exp_difference_pdf(v, 1.7, 3.0); },
                                  -kInfty, kInfty, {1e-15, 1e-13, 1000}, bp)
                                  .value;
    EXPECT_NEAR(marginal_pdf_w(s, w), pdf_oracle, 1e-9) << w;
  }
}

TEST(Factor, ParetoOneSidedMatchesSemiClosedForm) {
  const double th = 0.8;
  const double be = 3.0;
  const auto s = FactorSpec::one_sided(OneSidedFactor::pareto(th, be));
  for (double w : {-1.0, 0.9, 2.5, 6.0}) {
    const double tail = integrate_real_line(
                            [&](double z) { return std::pow(w - z, -be) * std::exp(-z * z / 2); }, -kInfty, w - th,
                            {1e-15, 1e-13, 1000})
                            .value;
    const double ex = std_normal_cdf(w - th) - std::pow(th, be) / std::sqrt(2 * M_PI) * tail;
    EXPECT_NEAR(marginal_cdf_w(s, w), ex, 1e-10) << w;
  }
}

TEST(Factor, MarginalPdfIntegratesToOne) {
  for (const auto& s : {model1(), model2(), model3()}) {
    const double total =
        integrate_real_line([&](double w) { return marginal_pdf_w(s, w); }, -kInfty, kInfty, {1e-12, 1e-10, 500})
            .value;
    EXPECT_NEAR(total, 1.0, 1e-7) << s.kink();
  }
  EXPECT_DOUBLE_EQ(marginal_pdf_w(FactorSpec::gaussian(), 0.7), std_normal_pdf(0.7));
}

TEST(Factor, MarginalPdfIsDerivativeOfCdf) {
  for (const auto& s : {model1(), model2()}) {
    for (double w : {-2.5, -0.4, 0.0, 1.1, 3.0}) {
      const double h = 1e-4;
      const double fd = (marginal_cdf_w(s, w + h) - marginal_cdf_w(s, w - h)) / (2 * h);
      EXPECT_NEAR(marginal_pdf_w(s, w), fd, 1e-7);
    }
  }
}

TEST(Factor, QuantileRoundTrip) {
  for (const auto& s : {model1(), model2(), model3(), FactorSpec::gaussian()}) {
    for (double p = 0.001; p < 0.9995; p += 0.0499) {
      const double q = marginal_quantile_w(s, p);
      EXPECT_NEAR(marginal_cdf_w(s, q), p, 1e-9) << p;
    }
    EXPECT_NEAR(marginal_cdf_w(s, marginal_quantile_w(s, 0.999)), 0.999, 1e-9);
  }
  EXPECT_THROW(marginal_quantile_w(model1(), 1.0), DomainError);
}

TEST(Factor, SymmetricDifferenceGivesSymmetricMarginal) {
  const auto e = FactorSpec::exponential_difference(1.4, 1.4);
  const auto p = FactorSpec::difference(OneSidedFactor::pareto(1.2, 4), OneSidedFactor::pareto(1.2, 4));
  for (double w : {0.3, 1.0, 2.7, 5.0}) {
    EXPECT_NEAR(marginal_pdf_w(e, w), marginal_pdf_w(e, -w), 1e-10);
    EXPECT_NEAR(marginal_pdf_w(p, w), marginal_pdf_w(p, -w), 1e-10);
  }
}

TEST(Factor, MarginalCdfStrictlyIncreasing) {
  for (const auto& s : {model1(), model2(), model3()}) {
    double prev = marginal_cdf_w(s, -8.0);
    int violations = 0;
    for (int i = 1; i <= 20000; ++i) {
      const double c = marginal_cdf_w(s, -8.0 + 1e-3 * i);
      if (!(c > prev)) ++violations;
      prev = c;
    }
    EXPECT_EQ(violations, 0);
  }
}

TEST(Factor, WeibullSurvivalTailOrder) {
  const auto one = FactorSpec::one_sided(OneSidedFactor::weibull(3, 0.8));
  for (double v : {20.0, 40.0}) EXPECT_NEAR(-std::log(one.survival(v)) / (3 * std::pow(v, 0.8)), 1.0, 1e-12);
  const auto diff = model3();
  const double r20 = -std::log(diff.survival(20.0)) / (3 * std::pow(20.0, 0.8));
  const double r40 = -std::log(diff.survival(40.0)) / (3 * std::pow(40.0, 0.8));
  EXPECT_LT(std::abs(r40 - 1.0), std::abs(r20 - 1.0));
  EXPECT_NEAR(r40, 1.0, 0.05);
}

TEST(Factor, MarginalFarTailsFollowFactorTails) {
  const FactorSpec s = model2();
  for (double w : {1000.0, 1e4}) {
    EXPECT_NEAR(marginal_sf_w(s, w) / std::pow(1.5 / w, 4), 1.0, 0.02) << w;
    EXPECT_NEAR(marginal_cdf_w(s, -w) / std::pow(1.0 / w, 5), 1.0, 0.02) << w;
    EXPECT_GT(marginal_pdf_w(s, w), 0.0);
  }
}
