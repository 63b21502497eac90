#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fcop/inference.hpp"
#include "fcop/parallel.hpp"
#include "fcop/simulation/sampling.hpp"
#include "fcop/tail.hpp"

namespace fcop {

// Replicated simulate-then-fit experiment on a k x k grid of the unit square with an
// exponential-difference factor and powered-exponential correlation.
struct StudyDesign {
  int k = 10;
  Eigen::Index replicates = 2000;
  int repetitions = 50;
  std::vector<double> theta{1.2, 2.5, 1.2, 1.5};  // theta_1, theta_2, theta_Z, alpha
  int procedure = 1;
  std::uint64_t seed = 1;
  MarginalModel margin = MarginalModel::student_t(1.5, 0.85, 8.0);
  int threads = 1;
  int max_iterations = 200;

  void validate() const {
    if (k < 1) throw ConfigError("StudyDesign: grid size must be at least 1");
    if (replicates < 2) throw ConfigError("StudyDesign: need at least two replicates");
    if (repetitions < 1) throw ConfigError("StudyDesign: need at least one repetition");
    if (theta.size() != 4) throw DimensionMismatch("StudyDesign: theta must have four entries");
    if (procedure < 1 || procedure > 4) throw ConfigError("StudyDesign: procedure must be 1, 2, 3 or 4");
    if (threads < 1) throw ConfigError("StudyDesign: threads must be positive");
    if (procedure >= 3) margin.validate();
  }

  FactorCopulaModel truth() const {
    return {CorrelationModel::powered_exponential(theta[2], theta[3]),
            FactorSpec::exponential_difference(theta[0], theta[1]), LocationSet::grid(k)};
  }
};

struct StudyRepetition {
  int index = 0;
  bool ok = false;
  bool converged = false;
  int iterations = 0;
  std::vector<double> estimates;
  std::string error;
};

struct StudySummary {
  std::vector<std::string> names;
  std::vector<double> truth;
  std::vector<double> mean;
  std::vector<double> bias;
  std::vector<double> sd;
  bool sd_available = false;
  int failures = 0;
  std::vector<StudyRepetition> repetitions;
};

// Data as the given procedure expects it: uniforms for 1, margin-transformed values otherwise.
inline Matrix simulate_study_data(const StudyDesign& d, const FactorCopulaModel& truth, std::uint64_t seed) {
  Matrix u = to_uniform(truth.factor(), sample_replicates(truth, d.replicates, seed));
  if (d.procedure == 1) return u;
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = student_t_quantile(u(i), d.margin);
  return u;
}

inline StudyRepetition run_study_repetition(const StudyDesign& d, const FactorCopulaModel& truth, int r) {
  StudyRepetition rep;
  rep.index = r;
  try {
    const Matrix y = simulate_study_data(d, truth, derive_seed(d.seed, static_cast<std::uint64_t>(r)));
    FitConfig cfg;
    cfg.procedure = d.procedure;
    cfg.standard_errors = false;
    cfg.max_iterations = d.max_iterations;
    const FitResult f = fit(y, truth.locations(), CorrelationFamily::powered_exponential, truth.factor(), cfg);
    rep.estimates = f.estimates();
    rep.converged = f.converged;
    rep.iterations = f.iterations;
    rep.ok = f.converged;
    if (!f.converged) rep.error = "optimizer did not converge";
  } catch (const Error& e) {
    rep.error = e.what();
  }
  return rep;
}

// Bias and standard deviation across repetitions. Failed or non-converged repetitions are excluded
// and counted.
inline StudySummary run_bias_sd_study(const StudyDesign& d) {
  d.validate();
  const FactorCopulaModel truth = d.truth();
  StudySummary s;
  s.names = {"theta_1", "theta_2", "theta_Z", "alpha"};
  s.truth = d.theta;
  if (d.procedure >= 3) {
    s.names.insert(s.names.end(), {"m", "sd", "nu"});
    s.truth.insert(s.truth.end(), {d.margin.m, d.margin.sd, d.margin.nu});
  }
  s.repetitions.resize(static_cast<std::size_t>(d.repetitions));
  parallel_for(s.repetitions.size(), d.threads,
               [&](std::size_t r) { s.repetitions[r] = run_study_repetition(d, truth, static_cast<int>(r)); });

  const std::size_t p = s.names.size();
  std::vector<std::vector<double>> cols(p);
  for (const auto& rep : s.repetitions) {
    if (!rep.ok || rep.estimates.size() < p) {
      ++s.failures;
      continue;
    }
    for (std::size_t j = 0; j < p; ++j) cols[j].push_back(rep.estimates[j]);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t good = cols[0].size();
  s.sd_available = good >= 2;
  for (std::size_t j = 0; j < p; ++j) {
    if (good == 0) {
      s.mean.push_back(nan);
      s.bias.push_back(nan);
      s.sd.push_back(nan);
      continue;
    }
    double sum = 0.0;
    for (double v : cols[j]) sum += v;
    const double mean = sum / static_cast<double>(good);
    double ss = 0.0;
    for (double v : cols[j]) ss += (v - mean) * (v - mean);
    s.mean.push_back(mean);
    s.bias.push_back(mean - s.truth[j]);
    s.sd.push_back(s.sd_available ? std::sqrt(ss / static_cast<double>(good - 1)) : nan);
  }
  return s;
}

struct Candidate {
  std::string name;
  FactorSpec form;  // degenerate for the Gaussian copula
};

struct MisspecificationDesign {
  FactorCopulaModel truth;
  std::vector<Candidate> candidates;
  Eigen::Index replicates = 2000;
  Eigen::Index model_draws = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  CorrelationFamily family = CorrelationFamily::powered_exponential;

  void validate() const {
    if (replicates < 2) throw ConfigError("MisspecificationDesign: need at least two replicates");
    if (model_draws < 1000) throw ConfigError("MisspecificationDesign: need at least 1000 model draws");
    if (std::none_of(candidates.begin(), candidates.end(), [](const Candidate& c) { return c.form.is_degenerate(); }))
      throw ConfigError("MisspecificationDesign: candidates must include the Gaussian baseline");
  }
};

struct MisspecificationRow {
  std::string name;
  FitResult fit;
  DeltaMetrics delta{};
};

struct MisspecificationTable {
  DependenceMatrices empirical;
  std::vector<MisspecificationRow> rows;
};

// Pareto-difference truth of the misspecification experiment on a 5 x 5 grid.
inline FactorCopulaModel misspecification_truth() {
  return {CorrelationModel::powered_exponential(0.6, 1.2),
          FactorSpec::difference(OneSidedFactor::pareto(0.8, 3.0), OneSidedFactor::pareto(2.5, 5.0)), LocationSet::grid(5)};
}

inline std::vector<Candidate> misspecification_candidates() {
  return {{"pareto_beta4", FactorSpec::difference(OneSidedFactor::pareto(1.0, 4.0), OneSidedFactor::pareto(1.0, 4.0))},
          {"exponential_difference", FactorSpec::exponential_difference(1.0, 1.0)},
          {"gaussian", FactorSpec::gaussian()}};
}

// Fits each candidate to one simulated sample on the rank scale and compares dependence matrices
// of the data with those of the fitted models. Fit failures propagate.
inline MisspecificationTable run_misspecification_study(const MisspecificationDesign& d) {
  d.validate();
  const Matrix y = sample_replicates(d.truth, d.replicates, derive_seed(d.seed, 0));
  MisspecificationTable t;
  t.empirical = dependence_matrices(y);
  for (std::size_t c = 0; c < d.candidates.size(); ++c) {
    const Candidate& cand = d.candidates[c];
    FitConfig cfg;
    cfg.procedure = 2;
    cfg.standard_errors = false;
    cfg.threads = d.threads;
    if (!cand.form.exponential_closed_form() && !cand.form.is_degenerate()) cfg.gradient_tol = 1e-5;
    MisspecificationRow row;
    row.name = cand.name;
    row.fit = fit(y, d.truth.locations(), d.family, cand.form, cfg);
    const auto model = model_dependence_matrices(row.fit.model(d.truth.locations()), d.model_draws,
                                                 derive_seed(d.seed, c + 1));
    row.delta = delta_metrics(t.empirical, model);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace fcop
