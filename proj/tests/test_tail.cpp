#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fcop/inference.hpp"
#include "fcop/tail.hpp"

using namespace fcop;

namespace {

FactorCopulaModel bivariate(const FactorSpec& f, double rho) {
  Matrix s(2, 2);
  s << 1.0, rho, rho, 1.0;
  Matrix c(2, 2);
  c << 0.0, 0.0, 1.0, 0.0;
  return FactorCopulaModel(cholesky(s), f, LocationSet(c));
}

FactorSpec model1() { return FactorSpec::exponential_difference(1.7, 3.0); }
FactorSpec model3() { return FactorSpec::difference(OneSidedFactor::weibull(3, 0.8), OneSidedFactor::weibull(2.5, 0.6)); }
FactorSpec exp_one_sided(double theta) { return FactorSpec::one_sided(OneSidedFactor::exponential(theta)); }

double hr_oracle(double lambda) { return 2.0 * std_normal_cdf(0.5 * lambda); }

}  // namespace

TEST(Tail, TheoreticalLambdaMatchesReportedCoefficients) {
  const double rho[] = {0.04, 0.33, 0.60};
  const double upper[] = {0.24, 0.33, 0.45};
  const double lower[] = {0.04, 0.08, 0.18};
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(theoretical_lambda(1.7, rho[k]), upper[k], 0.005);
    EXPECT_NEAR(theoretical_lambda(3.0, rho[k]), lower[k], 0.005);
  }
  EXPECT_NEAR(theoretical_lambda(1.7, 0.04), 0.2388, 1e-4);
  EXPECT_NEAR(theoretical_lambda(3.0, 0.04), 0.0376, 1e-4);
  EXPECT_NEAR(theoretical_lambda(1.7, 1.0 - 1e-14), 1.0, 1e-6);
}

TEST(Tail, TheoreticalLambdaRegimesAndErrors) {
  EXPECT_EQ(theoretical_lambda(2.0, 0.3, 0.8), 1.0);
  EXPECT_EQ(theoretical_lambda(2.0, 0.3, 0.0), 1.0);
  EXPECT_EQ(theoretical_lambda(2.0, 0.3, 1.5), 0.0);
  EXPECT_THROW(theoretical_lambda(1.7, 1.0), DomainError);
  EXPECT_THROW(theoretical_lambda(0.0, 0.3), DomainError);
}

TEST(Tail, LambdaQIndependenceAndComonotone) {
  const auto ind = bivariate(FactorSpec::gaussian(), 0.0);
  for (double q : {0.5, 0.1, 0.01}) {
    EXPECT_NEAR(lambda_q(ind, q, Tail::upper), q, 1e-8);
    EXPECT_NEAR(lambda_q(ind, q, Tail::lower), q, 1e-8);
  }
  const auto como = bivariate(FactorSpec::gaussian(), 1.0 - 1e-8);
  EXPECT_GT(lambda_q(como, 0.1, Tail::upper), 0.99);
  EXPECT_GT(lambda_q(como, 0.1, Tail::lower), 0.99);
}

TEST(Tail, LambdaQRejectsLevelOutsideRange) {
  const auto m = bivariate(model1(), 0.3);
  EXPECT_THROW(lambda_q(m, 0.0, Tail::upper), DomainError);
  EXPECT_THROW(lambda_q(m, 0.6, Tail::lower), DomainError);
}

TEST(Tail, LambdaQApproachesClosedFormForExponentialDifference) {
  const auto m = bivariate(model1(), 0.04);
  EXPECT_NEAR(lambda_q(m, 1e-3, Tail::upper), 0.24, 0.03);
  const double v = lambda_q(m, 1e-6, Tail::upper);
  EXPECT_NEAR(v, theoretical_lambda(1.7, 0.04), 2e-3);
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, 1.0);
}

TEST(Tail, SmallLevelPathAgreesWithBivariateCdf) {
  for (const auto& f : {model1(), model3()}) {
    const auto m = bivariate(f, 0.33);
    for (Tail t : {Tail::upper, Tail::lower}) {
      const double q = 1e-3;
      const double z = t == Tail::upper ? marginal_quantile_w(f, 1.0 - q) : marginal_quantile_w(f, q);
      const double single = appendix_tail_integrals(f, 0.33, z, t).joint_survival / q;
      EXPECT_NEAR(single, lambda_q(m, q, t), 1e-6);
    }
  }
}

TEST(Tail, LambdaQMatchesEmpiricalFrequency) {
  const auto m = bivariate(model1(), 0.33);
  const Matrix w = sample_replicates(m, 1000000, 17);
  const Matrix u = rank_transform(w);
  for (double q : {0.01, 0.05}) {
    double lo = 0.0;
    double hi = 0.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      lo += (u(r, 0) <= q && u(r, 1) <= q);
      hi += (u(r, 0) > 1.0 - q && u(r, 1) > 1.0 - q);
    }
    const double n = static_cast<double>(u.rows());
    EXPECT_NEAR(lo / (n * q), lambda_q(m, q, Tail::lower), 0.015);
    EXPECT_NEAR(hi / (n * q), lambda_q(m, q, Tail::upper), 0.015);
  }
}

TEST(Tail, FiniteLevelTrendsFollowFactorTailOrder) {
  const auto heavy = bivariate(model3(), 0.3);
  const auto w08 = bivariate(FactorSpec::one_sided(OneSidedFactor::weibull(1.0, 0.8)), 0.3);
  double prev_l = 0.0;
  double prev_u = 0.0;
  for (double q : {0.1, 0.01, 0.001}) {
    const double l = lambda_q(heavy, q, Tail::lower);
    const double u = lambda_q(w08, q, Tail::upper);
    EXPECT_GT(l, prev_l);
    EXPECT_GT(u, prev_u);
    prev_l = l;
    prev_u = u;
  }
  const auto light = bivariate(FactorSpec::one_sided(OneSidedFactor::weibull(1.0, 1.5)), 0.3);
  double prev = 1.0;
  for (double q : {0.1, 0.01, 0.001}) {
    const double u = lambda_q(light, q, Tail::upper);
    EXPECT_LT(u, prev);
    prev = u;
  }
}

TEST(Tail, AppendixMarginalMatchesMarginalCdf) {
  const FactorSpec specs[] = {exp_one_sided(1.7), model1(), model3(),
                              FactorSpec::one_sided(OneSidedFactor::pareto(1.0, 3.0)),
                              FactorSpec::one_sided(OneSidedFactor::weibull(1.0, 1.5))};
  for (const auto& f : specs)
    for (double z : {-2.0, 0.5, 3.0, 6.0}) {
      EXPECT_NEAR(appendix_tail_integrals(f, 0.3, z).marginal_survival, marginal_sf_w(f, z), 1e-9);
      EXPECT_NEAR(appendix_tail_integrals(f, 0.3, z, Tail::lower).marginal_survival, marginal_cdf_w(f, z), 1e-9);
    }
}

TEST(Tail, AppendixJointMatchesUpperOrthant) {
  for (const auto& f : {model1(), model3()}) {
    const auto m = bivariate(f, 0.5);
    for (double z : {0.5, 2.0, 4.0}) {
      const double q = marginal_sf_w(f, z);
      EXPECT_NEAR(appendix_tail_integrals(m, z).joint_survival, copula_upper_orthant_2(m, q, q, 0, 1), 1e-8);
    }
  }
}

TEST(Tail, AppendixRatioRegimes) {
  const double zs[] = {8.0, 12.0, 15.0};
  for (double z : zs) EXPECT_NEAR(appendix_tail_integrals(exp_one_sided(1.7), 0.04, z).ratio(), 0.2388, 0.01);

  const FactorSpec rising[] = {FactorSpec::one_sided(OneSidedFactor::weibull(1.0, 0.8)),
                               FactorSpec::one_sided(OneSidedFactor::pareto(1.0, 3.0))};
  for (const auto& f : rising) {
    double prev = 0.0;
    for (double z : zs) {
      const double r = appendix_tail_integrals(f, 0.04, z).ratio();
      EXPECT_GT(r, prev);
      prev = r;
    }
    EXPECT_GT(prev, 0.7);
  }

  const auto light = FactorSpec::one_sided(OneSidedFactor::weibull(1.0, 1.5));
  double prev = 1.0;
  for (double z : zs) {
    const double r = appendix_tail_integrals(light, 0.04, z).ratio();
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LE(prev, 0.05);
}

TEST(Tail, HuslerReissProperties) {
  for (double lam : {0.3, 1.0, 2.4}) {
    for (double x : {0.2, 1.0, 3.0}) EXPECT_NEAR(husler_reiss_ell(x, x, lam), 2.0 * x * std_normal_cdf(0.5 * lam), 1e-14);
    const double a = 0.7;
    const double b = 2.3;
    const double l = husler_reiss_ell(a, b, lam);
    EXPECT_DOUBLE_EQ(l, husler_reiss_ell(b, a, lam));
    EXPECT_GE(l, std::max(a, b));
    EXPECT_LE(l, a + b);
    for (double c : {0.01, 0.5, 7.0, 1e3}) EXPECT_NEAR(husler_reiss_ell(c * a, c * b, lam), c * l, 1e-12 * c * l);
  }
  EXPECT_NEAR(husler_reiss_ell(0.4, 1.1, 80.0), 1.5, 1e-12);
  EXPECT_THROW(husler_reiss_ell(0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(husler_reiss_ell(1.0, 1.0, -1.0), DomainError);
}

TEST(Tail, PreLimitEllApproachesHuslerReiss) {
  for (double rho : {0.04, 0.33}) {
    const double lam = husler_reiss_lambda(1.7, rho);
    EXPECT_NEAR(empirical_ell(bivariate(exp_one_sided(1.7), rho), 1e-4, 1.0, 1.0), hr_oracle(lam), 0.02);
    EXPECT_NEAR(empirical_ell(bivariate(model1(), rho), 1e-4, 1.0, 1.0), hr_oracle(lam), 0.02);
  }
}

TEST(Tail, Zeta1ReproducesReportedSkewness) {
  const double rho[] = {0.04, 0.33, 0.60};
  const double expected[] = {0.007, 0.005, 0.003};
  for (int k = 0; k < 3; ++k) {
    const auto z = zeta1(bivariate(model1(), rho[k]), 100000, 101 + k);
    EXPECT_NEAR(z.value, expected[k], 0.002);
    EXPECT_LE(std::abs(z.value), 0.027);
    EXPECT_GT(z.se, 0.0);
  }
  const auto neg = zeta1(bivariate(model3(), 0.3), 100000, 5);
  EXPECT_LT(neg.value, 0.0);
  EXPECT_LE(std::abs(neg.value), 0.027);
}

TEST(Tail, Zeta1VanishesForSymmetricFactor) {
  const auto z = zeta1(bivariate(FactorSpec::exponential_difference(2.0, 2.0), 0.3), 100000, 9);
  EXPECT_LE(std::abs(z.value), 3.0 * z.se);
  EXPECT_THROW(zeta1(bivariate(model1(), 0.3), 5000, 1), ConfigError);
}

TEST(Tail, SpearmanModelAndData) {
  const auto s = spearman_rho(bivariate(model1(), 0.33), 100000, 3);
  EXPECT_NEAR(s.value, 0.5, 0.01);
  const auto ind = spearman_rho(bivariate(FactorSpec::gaussian(), 0.0), 100000, 4);
  EXPECT_LE(std::abs(ind.value), 3.0 * ind.se);

  Vector x = Vector::LinSpaced(50, 0.0, 1.0);
  Vector y = x.array().exp();
  EXPECT_NEAR(spearman_rho(x, y), 1.0, 1e-12);
  EXPECT_NEAR(spearman_rho(x, Vector(-y)), -1.0, 1e-12);
  EXPECT_THROW(spearman_rho(x, Vector(Vector::Constant(50, 2.0))), DomainError);
}

TEST(Tail, TailWeightedLimits) {
  std::mt19937_64 rng(11);
  const Eigen::Index n = 100000;
  Vector u1(n);
  Vector u2(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    u1(r) = uniform_open(rng);
    u2(r) = uniform_open(rng);
  }
  for (Tail t : {Tail::lower, Tail::upper}) {
    const auto ind = tail_weighted(u1, u2, t);
    EXPECT_LE(std::abs(ind.value), 3.0 * ind.se);
    EXPECT_NEAR(tail_weighted(u1, u1, t).value, 1.0, 1e-6);
  }
  EXPECT_THROW(tail_weighted(u1, u2, Tail::lower, 0), ConfigError);
  EXPECT_THROW(tail_weighted(u1, Vector(u2.head(10)), Tail::lower), DimensionMismatch);
  EXPECT_THROW(tail_weighted(Vector::Constant(10, 0.9), Vector::Constant(10, 0.9), Tail::lower), DomainError);
}

TEST(Tail, TailWeightedModelMatchesSelfSimulatedData) {
  const auto m = bivariate(model1(), 0.33);
  const Matrix emp = rank_transform(sample_replicates(m, 100000, 21));
  const Matrix mod = sample_pair_uniforms(m, 100000, 22);
  for (Tail t : {Tail::lower, Tail::upper}) {
    const double a = tail_weighted(emp.col(0), emp.col(1), t).value;
    const double b = tail_weighted(mod.col(0), mod.col(1), t).value;
    EXPECT_NEAR(a, b, 0.02);
  }
}

TEST(Tail, TailReportIsConsistent) {
  const auto m = bivariate(model1(), 0.33);
  const auto r = tail_report(m, {0.2, 0.05, 0.01}, 20000, 3);
  ASSERT_EQ(r.lambda_l.size(), 3u);
  for (std::size_t k = 0; k < r.q.size(); ++k) {
    EXPECT_GE(r.lambda_l[k], 0.0);
    EXPECT_LE(r.lambda_u[k], 1.0);
    EXPECT_GT(r.asymmetry[k], 0.0);
    EXPECT_EQ(r.asymmetry[k] > 1.0, r.lambda_l[k] > r.lambda_u[k]);
  }
  EXPECT_LT(r.asymmetry.back(), 1.0);
}

TEST(Tail, DeltaMetricsDefinitions) {
  Matrix a(3, 3);
  a << 1.0, 0.4, 0.2, 0.4, 1.0, 0.3, 0.2, 0.3, 1.0;
  const DependenceMatrices model{a, a * 0.5, a * 0.7};
  const auto zero = delta_metrics(model, model);
  for (double v : {zero.rho, zero.rho_abs, zero.lower, zero.lower_abs, zero.upper, zero.upper_abs}) EXPECT_EQ(v, 0.0);

  const DependenceMatrices shifted{a.array() + 0.01, (a * 0.5).array() + 0.01, (a * 0.7).array() + 0.01};
  const auto d = delta_metrics(model, shifted);
  for (double v : {d.rho, d.lower, d.upper}) EXPECT_NEAR(v, -0.01, 1e-15);
  for (double v : {d.rho_abs, d.lower_abs, d.upper_abs}) EXPECT_NEAR(v, 0.01, 1e-15);

  const DependenceMatrices small{Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  EXPECT_THROW(delta_metrics(model, small), DimensionMismatch);
}

TEST(Tail, WellSpecifiedFitHasSmallTailDeltas) {
  const FactorCopulaModel truth(CorrelationModel::powered_exponential(1.2, 1.5), FactorSpec::exponential_difference(1.2, 2.5),
                                LocationSet::grid(5));
  const Matrix y = to_uniform(truth.factor(), sample_replicates(truth, 2000, 31));
  const auto fitted = fit(y, truth.locations(), CorrelationFamily::powered_exponential, truth.factor(), [] {
    FitConfig c;
    c.standard_errors = false;
    return c;
  }());
  ASSERT_TRUE(fitted.converged);
  const auto emp = dependence_matrices(y);
  const auto mod = model_dependence_matrices(fitted.model(truth.locations()), 100000, 32);
  const auto d = delta_metrics(emp, mod);
  EXPECT_LE(std::abs(d.lower), 0.03);
  EXPECT_LE(std::abs(d.upper), 0.03);
  EXPECT_LE(std::abs(d.rho), 0.03);
}
