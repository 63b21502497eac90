#pragma once

#include <cmath>
#include <memory>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "fcop/error.hpp"

namespace fcop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Symmetric positive definite matrix with its lower Cholesky factor.
class SpdMatrix {
 public:
  SpdMatrix() = default;

  Eigen::Index order() const { return a_.rows(); }
  const Matrix& matrix() const { return a_; }
  const Matrix& factor() const { return l_; }

  double logdet() const { return 2.0 * l_.diagonal().array().log().sum(); }

  Vector solve(const Vector& b) const {
    if (b.size() != order()) throw DimensionMismatch("spd_solve: right-hand side has wrong length");
    Vector y = l_.triangularView<Eigen::Lower>().solve(b);
    return l_.transpose().triangularView<Eigen::Upper>().solve(y);
  }

  Matrix solve(const Matrix& b) const {
    if (b.rows() != order()) throw DimensionMismatch("spd_solve: right-hand side has wrong rows");
    Matrix y = l_.triangularView<Eigen::Lower>().solve(b);
    return l_.transpose().triangularView<Eigen::Upper>().solve(y);
  }

  Matrix inverse() const { return solve(Matrix(Matrix::Identity(order(), order()))); }

  friend SpdMatrix cholesky(const Matrix& m);

 private:
  Matrix a_;
  Matrix l_;
};

// Cholesky factorization; rejects asymmetric input and reports the failing pivot.
inline SpdMatrix cholesky(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("cholesky: matrix is not square");
  const Eigen::Index n = m.rows();
  const double scale = n > 0 ? m.cwiseAbs().maxCoeff() : 1.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(1.0, scale))
        throw DomainError("cholesky: matrix is not symmetric");
  Matrix l = Matrix::Zero(n, n);
  const double pivot_floor = 1e-12 * std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > pivot_floor)) throw NotPositiveDefinite(static_cast<std::size_t>(j), d);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    if (j + 1 < n) {
      l.col(j).tail(n - j - 1) =
          (m.col(j).tail(n - j - 1) - l.bottomLeftCorner(n - j - 1, j) * l.row(j).head(j).transpose()) / ljj;
    }
  }
  SpdMatrix s;
  s.a_ = m;
  s.l_ = std::move(l);
  return s;
}

inline Vector spd_solve(const SpdMatrix& m, const Vector& b) { return m.solve(b); }
inline double spd_logdet(const SpdMatrix& m) { return m.logdet(); }

}  // namespace fcop
