#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "fcop/error.hpp"
#include "fcop/numerics/spd.hpp"

namespace fcop {

struct OptimizerOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-6;
  int step_halving_max = 30;
  // Cap on the infinity norm of a single step in the transformed parameters.
  double max_step = 2.0;

  void validate() const {
    if (max_iterations < 1 || !(gradient_tol > 0.0) || step_halving_max < 1 || !(max_step > 0.0))
      throw ConfigError("OptimizerOptions: tolerances and limits must be positive");
  }
};

struct OptimizerTraceRow {
  int iteration;
  double objective;
  double gradient_norm;
  int halvings;
};

struct OptimizerResult {
  Vector x;
  double objective = -std::numeric_limits<double>::infinity();
  Vector gradient;
  double gradient_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<OptimizerTraceRow> trace;
};

// Objective returns f(x) and fills grad when it is non-null. Non-finite values or thrown
// numeric errors are treated as infeasible points.
using ObjectiveFn = std::function<double(const Vector& x, Vector* grad)>;

namespace detail {

inline bool safe_eval(const ObjectiveFn& f, const Vector& x, double& value, Vector* grad) {
  try {
    value = f(x, grad);
  } catch (const NumericError&) {
    return false;
  } catch (const DomainError&) {
    return false;
  }
  return std::isfinite(value) && (grad == nullptr || grad->allFinite());
}

}  // namespace detail

// Maximizes f by BFGS with step halving; accepted steps never decrease f.
inline OptimizerResult maximize_bfgs(const ObjectiveFn& f, Vector x0, const OptimizerOptions& opt = {}) {
  opt.validate();
  const Eigen::Index p = x0.size();
  OptimizerResult res;
  res.x = std::move(x0);
  Vector g(p);
  if (!detail::safe_eval(f, res.x, res.objective, &g))
    throw NumericError("maximize_bfgs: objective is not finite at the starting point");
  res.gradient = g;
  res.gradient_norm = g.cwiseAbs().maxCoeff();
  // Inverse Hessian approximation of -f.
  Matrix h = Matrix::Identity(p, p);
  bool scaled = false;
  res.trace.push_back({0, res.objective, res.gradient_norm, 0});
  for (int it = 1; it <= opt.max_iterations; ++it) {
    if (res.gradient_norm <= opt.gradient_tol) {
      res.converged = true;
      break;
    }
    Vector dir = h * g;
    if (dir.dot(g) <= 0.0) {
      h.setIdentity();
      dir = g;
    }
    const double big = dir.cwiseAbs().maxCoeff();
    if (big > opt.max_step) dir *= opt.max_step / big;
    double step = 1.0;
    int halvings = 0;
    bool accepted = false;
    double fnew = 0.0;
    Vector xnew;
    for (; halvings <= opt.step_halving_max; ++halvings, step *= 0.5) {
      xnew = res.x + step * dir;
      if (detail::safe_eval(f, xnew, fnew, nullptr) && fnew >= res.objective + 1e-4 * step * dir.dot(g)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // A plain gradient step is the last resort before giving up.
      if (!scaled) break;
      h.setIdentity();
      scaled = false;
      continue;
    }
    Vector gnew(p);
    if (!detail::safe_eval(f, xnew, fnew, &gnew)) break;
    const Vector s = xnew - res.x;
    const Vector y = g - gnew;  // gradient change of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h = Matrix::Identity(p, p) * (sy / y.dot(y));
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Matrix i_sy = Matrix::Identity(p, p) - rho * s * y.transpose();
      h = i_sy * h * i_sy.transpose() + rho * s * s.transpose();
    }
    res.x = xnew;
    res.objective = fnew;
    g = gnew;
    res.gradient = g;
    res.gradient_norm = g.cwiseAbs().maxCoeff();
    res.iterations = it;
    res.trace.push_back({it, res.objective, res.gradient_norm, halvings});
  }
  res.converged = res.gradient_norm <= opt.gradient_tol;
  return res;
}

// Central-difference gradient.
inline Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vector up = x;
    Vector dn = x;
    up(k) += h;
    dn(k) -= h;
    g(k) = (f(up) - f(dn)) / (2.0 * h);
  }
  return g;
}

// Symmetrized central-difference Jacobian of a gradient function.
inline Matrix central_hessian(const std::function<Vector(const Vector&)>& grad, const Vector& x, double h = 1e-4) {
  const Eigen::Index p = x.size();
  Matrix hess(p, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    Vector up = x;
    Vector dn = x;
    up(k) += h;
    dn(k) -= h;
    hess.col(k) = (grad(up) - grad(dn)) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace fcop
