#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fcop/error.hpp"
#include "fcop/numerics/spd.hpp"

namespace fcop {

class LocationSet {
 public:
  LocationSet() = default;

  // coords is n x d, one site per row.
  explicit LocationSet(Matrix coords, std::vector<std::string> labels = {})
      : coords_(std::move(coords)), labels_(std::move(labels)) {
    if (coords_.cols() < 1) throw ConfigError("LocationSet: dimension must be at least 1");
    if (!coords_.allFinite()) throw ConfigError("LocationSet: non-finite coordinate");
    if (labels_.empty()) {
      for (Eigen::Index i = 0; i < coords_.rows(); ++i) labels_.push_back("s" + std::to_string(i + 1));
    }
    if (static_cast<Eigen::Index>(labels_.size()) != coords_.rows())
      throw DimensionMismatch("LocationSet: label count differs from site count");
    for (Eigen::Index i = 0; i < coords_.rows(); ++i)
      for (Eigen::Index j = 0; j < i; ++j)
        if ((coords_.row(i) - coords_.row(j)).squaredNorm() == 0.0)
          throw ConfigError("LocationSet: duplicate sites " + labels_[j] + " and " + labels_[i]);
  }

  // k x k uniform grid on [0,1]^2 (k = 1 gives the centre).
  static LocationSet grid(int k) {
    if (k < 1) throw ConfigError("LocationSet::grid: k must be positive");
    Matrix c(k * k, 2);
    int r = 0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j, ++r) {
        c(r, 0) = k == 1 ? 0.5 : static_cast<double>(j) / (k - 1);
        c(r, 1) = k == 1 ? 0.5 : static_cast<double>(i) / (k - 1);
      }
    return LocationSet(std::move(c));
  }

  Eigen::Index size() const { return coords_.rows(); }
  Eigen::Index dimension() const { return coords_.cols(); }
  const Matrix& coords() const { return coords_; }
  const std::vector<std::string>& labels() const { return labels_; }
  Eigen::RowVectorXd site(Eigen::Index i) const { return coords_.row(i); }

  LocationSet subset(const std::vector<Eigen::Index>& idx) const {
    Matrix c(idx.size(), coords_.cols());
    std::vector<std::string> l;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      c.row(i) = coords_.row(idx[i]);
      l.push_back(labels_[idx[i]]);
    }
    return LocationSet(std::move(c), std::move(l));
  }

 private:
  Matrix coords_;
  std::vector<std::string> labels_;
};

inline Matrix distance_matrix(const LocationSet& l) {
  const auto n = l.size();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) d(i, j) = d(j, i) = (l.coords().row(i) - l.coords().row(j)).norm();
  return d;
}

enum class CorrelationFamily { powered_exponential, matern, damped_cosine };

inline std::string to_string(CorrelationFamily f) {
  switch (f) {
    case CorrelationFamily::powered_exponential: return "powered_exponential";
    case CorrelationFamily::matern: return "matern";
    case CorrelationFamily::damped_cosine: return "damped_cosine";
  }
  return "?";
}

inline CorrelationFamily correlation_family_from_string(const std::string& s) {
  if (s == "powered_exponential") return CorrelationFamily::powered_exponential;
  if (s == "matern") return CorrelationFamily::matern;
  if (s == "damped_cosine") return CorrelationFamily::damped_cosine;
  throw ConfigError("unknown correlation family '" + s + "'");
}

// Isotropic correlation function rho(h).
//   powered_exponential: exp(-theta h^alpha), theta > 0, 0 < alpha <= 2
//   matern: 2^(1-nu)/Gamma(nu) (h/range)^nu K_nu(h/range), range > 0, nu > 0
//   damped_cosine: cos(h) exp(-lambda h), lambda > 0
class CorrelationModel {
 public:
  CorrelationModel() : CorrelationModel(CorrelationFamily::powered_exponential, {1.0, 1.0}) {}

  CorrelationModel(CorrelationFamily family, std::vector<double> params)
      : family_(family), params_(std::move(params)) {
    if (params_.size() != parameter_count(family_))
      throw ConfigError("CorrelationModel: wrong parameter count for " + to_string(family_));
    for (double p : params_)
      if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("CorrelationModel: parameters must be positive");
    if (family_ == CorrelationFamily::powered_exponential && params_[1] > 2.0)
      throw DomainError("CorrelationModel: powered_exponential alpha must lie in (0,2]");
  }

  static CorrelationModel powered_exponential(double theta, double alpha) {
    return {CorrelationFamily::powered_exponential, {theta, alpha}};
  }
  static CorrelationModel matern(double range, double smoothness) {
    return {CorrelationFamily::matern, {range, smoothness}};
  }
  static CorrelationModel damped_cosine(double lambda) { return {CorrelationFamily::damped_cosine, {lambda}}; }

  static std::size_t parameter_count(CorrelationFamily f) {
    return f == CorrelationFamily::damped_cosine ? 1 : 2;
  }
  static std::vector<std::string> parameter_names(CorrelationFamily f) {
    switch (f) {
      case CorrelationFamily::powered_exponential: return {"theta_Z", "alpha"};
      case CorrelationFamily::matern: return {"range", "smoothness"};
      case CorrelationFamily::damped_cosine: return {"lambda"};
    }
    return {};
  }

  CorrelationFamily family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  CorrelationModel with_params(std::vector<double> p) const { return {family_, std::move(p)}; }

  double operator()(double h) const {
    if (h < 0.0 || std::isnan(h)) throw DomainError("correlation: distance must be nonnegative");
    if (h == 0.0) return 1.0;
    switch (family_) {
      case CorrelationFamily::powered_exponential:
        return std::exp(-params_[0] * std::pow(h, params_[1]));
      case CorrelationFamily::matern: {
        const double x = h / params_[0];
        const double nu = params_[1];
        if (nu == 0.5) return std::exp(-x);
        if (x > 700.0) return 0.0;
        const double logv = (1.0 - nu) * std::numbers::ln2 - std::lgamma(nu) + nu * std::log(x);
        return std::exp(logv) * std::cyl_bessel_k(nu, x);
      }
      case CorrelationFamily::damped_cosine:
        return std::cos(h) * std::exp(-params_[0] * h);
    }
    return 0.0;
  }

  // Partial derivatives of rho(h) with respect to each parameter.
  std::vector<double> gradient(double h) const {
    std::vector<double> g(params_.size(), 0.0);
    if (h == 0.0) return g;
    switch (family_) {
      case CorrelationFamily::powered_exponential: {
        const double ha = std::pow(h, params_[1]);
        const double r = std::exp(-params_[0] * ha);
        g[0] = -ha * r;
        g[1] = -params_[0] * ha * std::log(h) * r;
        break;
      }
      case CorrelationFamily::damped_cosine:
        g[0] = -h * (*this)(h);
        break;
      case CorrelationFamily::matern:
        for (std::size_t k = 0; k < params_.size(); ++k) {
          const double step = 1e-6 * params_[k];
          auto up = params_;
          auto dn = params_;
          up[k] += step;
          dn[k] -= step;
          g[k] = (with_params(up)(h) - with_params(dn)(h)) / (2.0 * step);
        }
        break;
    }
    return g;
  }

 private:
  CorrelationFamily family_;
  std::vector<double> params_;
};

inline double correlation(const CorrelationModel& m, double h) { return m(h); }

inline Matrix correlation_matrix(const CorrelationModel& m, const Matrix& dist) {
  const auto n = dist.rows();
  Matrix s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) s(i, j) = s(j, i) = m(dist(i, j));
  }
  return s;
}

inline SpdMatrix build_sigma_z(const CorrelationModel& m, const LocationSet& l) {
  return cholesky(correlation_matrix(m, distance_matrix(l)));
}

inline SpdMatrix sigma_w(const SpdMatrix& sigma_z, double var_v0) {
  if (!(var_v0 >= 0.0) || !std::isfinite(var_v0))
    throw UnsupportedVariance("sigma_w: factor variance must be finite and nonnegative");
  Matrix s = (sigma_z.matrix().array() + var_v0) / (1.0 + var_v0);
  return cholesky(s);
}

inline LocationSet read_locations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open locations file " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty locations file " + path);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "id") throw ConfigError("locations file " + path + ": header must start with id");
  const std::size_t d = header.size() - 1;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    labels.push_back(cell);
    std::vector<double> r;
    while (std::getline(ss, cell, ',')) {
      try {
        r.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("locations file " + path + ": bad number '" + cell + "'");
      }
    }
    if (r.size() != d) throw ConfigError("locations file " + path + ": wrong column count");
    rows.push_back(std::move(r));
  }
  Matrix c(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) c(i, j) = rows[i][j];
  return LocationSet(std::move(c), std::move(labels));
}

}  // namespace fcop
