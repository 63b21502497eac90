#pragma once

#include <cstdint>
#include <random>

#include "fcop/copula.hpp"
#include "fcop/parallel.hpp"

namespace fcop {

// N replicates of W = Z + V0 1 with Z ~ N(0, Sigma_Z). The factor draws are stored in `factor`
// when it is given.
inline Matrix sample_replicates(const FactorCopulaModel& m, Eigen::Index n_rep, std::uint64_t seed,
                                Vector* factor = nullptr) {
  if (n_rep < 1) throw ConfigError("sample_replicates: need at least one replicate");
  std::mt19937_64 rng(seed);
  const Eigen::Index n = m.size();
  const Matrix& l = m.sigma_z().factor();
  Matrix w(n_rep, n);
  Vector g(n);
  if (factor) factor->resize(n_rep);
  for (Eigen::Index i = 0; i < n_rep; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(j) = std_normal_quantile(uniform_open(rng));
    const double v0 = m.factor().sample(rng);
    if (factor) (*factor)(i) = v0;
    w.row(i) = (l.triangularView<Eigen::Lower>() * g).transpose().array() + v0;
  }
  return w;
}

// Probability integral transform through F_1^W.
inline Matrix to_uniform(const FactorSpec& s, const Matrix& w, int threads = 1) {
  Matrix u(w.rows(), w.cols());
  parallel_for(static_cast<std::size_t>(w.size()), threads, [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    u(i) = marginal_cdf_w(s, w(i));
  });
  return u;
}

}  // namespace fcop
