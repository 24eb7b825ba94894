#pragma once

// Quasi-Newton maximization (BFGS with backtracking line search) and the
// central-difference utilities used as derivative oracles.

#include "tobitls/model.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace tobitls {

struct OptimOptions {
  int max_iterations = 500;
  /// Max-abs gradient in the working parameterization.
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-12;
  double armijo = 1e-4;
  double contraction = 0.5;
  /// Optimize phi on the log scale (true) or directly (false).
  bool log_dispersion = true;

  void validate() const;
};

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Outcome of a generic maximization.
template <typename Scalar>
struct BfgsTrace {
  VectorX<Scalar> x;
  Scalar value = -std::numeric_limits<Scalar>::infinity();
  int iterations = 0;
  bool converged = false;
  Scalar gradient_norm = std::numeric_limits<Scalar>::infinity();
  int skipped_updates = 0;
  std::string message;
  /// Objective after each accepted step, starting with the initial value.
  std::vector<Scalar> history;
};

/// Maximizes `objective` starting from x0. Non-finite objective values (and
/// gradients that throw) are treated as rejected trial points. Throws
/// std::domain_error when the objective is not finite at x0.
template <typename Scalar>
BfgsTrace<Scalar> bfgs_maximize(const std::function<Scalar(const VectorX<Scalar>&)>& objective,
                                const std::function<VectorX<Scalar>(const VectorX<Scalar>&)>& gradient,
                                VectorX<Scalar> x0, const OptimOptions& opts);

/// Central differences with per-coordinate step h * max(1, |x_j|).
template <typename Scalar, typename F>
VectorX<Scalar> numerical_gradient(F&& f, const VectorX<Scalar>& x, Scalar h = Scalar(1e-6)) {
  VectorX<Scalar> g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const Scalar step = h * std::max(Scalar(1), std::abs(x[j]));
    VectorX<Scalar> lo = x, hi = x;
    lo[j] -= step;
    hi[j] += step;
    const Scalar fl = f(lo), fh = f(hi);
    if (!std::isfinite(fl) || !std::isfinite(fh)) {
      throw std::domain_error("numerical_gradient: non-finite value inside the stencil");
    }
    g[j] = (fh - fl) / (2 * step);
  }
  return g;
}

/// Jacobian of a vector map by central differences; row i is d g_i / d x.
template <typename Scalar, typename G>
MatrixX<Scalar> numerical_jacobian(G&& g, const VectorX<Scalar>& x, Scalar h = Scalar(1e-6)) {
  MatrixX<Scalar> J;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const Scalar step = h * std::max(Scalar(1), std::abs(x[j]));
    VectorX<Scalar> lo = x, hi = x;
    lo[j] -= step;
    hi[j] += step;
    const VectorX<Scalar> gl = g(lo), gh = g(hi);
    if (!gl.allFinite() || !gh.allFinite()) {
      throw std::domain_error("numerical_jacobian: non-finite value inside the stencil");
    }
    if (j == 0) J.resize(gl.size(), x.size());
    J.col(j) = (gh - gl) / (2 * step);
  }
  return J;
}

struct OptimResult {
  Theta theta_hat;
  double loglik_at_max = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  double final_gradient_norm = std::numeric_limits<double>::infinity();
  int skipped_updates = 0;
  std::string message;
};

/// Map from a packed coordinate to the optimizer's unconstrained scale:
/// phi on the log scale (when log_dispersion), positive extras on the log
/// scale, the power-exponential extra through a logistic map onto (-1, 1).
enum class Transform { Identity, Log, UnitLogistic };

std::vector<Transform> working_transforms(const Theta& theta, const OptimOptions& opts);
double to_working(Transform t, double natural);
double to_natural(Transform t, double working);
/// First and second derivative of natural with respect to working, written
/// in terms of the natural value.
double working_d1(Transform t, double natural);
double working_d2(Transform t, double natural);

/// Least squares on the uncensored cases for beta, the residual standard
/// deviation (floored at 1e-3) for phi, and default values for free extras.
/// Throws std::invalid_argument with fewer than p + 1 uncensored cases or a
/// rank-deficient uncensored design.
Theta starting_values(const TobitDataset& data, const GeneratorFamily& family);

/// Maximizes loglik over the free coordinates of pack(start). Coordinates
/// flagged in `fixed` (same layout as pack) stay at their starting values.
OptimResult maximize_loglik(const TobitDataset& data, const Theta& start,
                            const OptimOptions& opts = {}, const std::vector<bool>& fixed = {});

}  // namespace tobitls

#include "tobitls/bfgs.ipp"
