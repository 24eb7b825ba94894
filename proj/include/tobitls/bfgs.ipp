#pragma once

// Implementation of bfgs_maximize; included from optimize.hpp.

#include <algorithm>
#include <cmath>
#include <exception>

namespace tobitls {

namespace detail {

template <typename Scalar>
bool try_gradient(const std::function<VectorX<Scalar>(const VectorX<Scalar>&)>& gradient,
                  const VectorX<Scalar>& x, VectorX<Scalar>& out) {
  try {
    out = gradient(x);
  } catch (const std::domain_error&) {
    return false;
  } catch (const std::invalid_argument&) {
    return false;
  }
  return out.allFinite();
}

template <typename Scalar>
Scalar safe_value(const std::function<Scalar(const VectorX<Scalar>&)>& f, const VectorX<Scalar>& x) {
  try {
    const Scalar v = f(x);
    return std::isfinite(v) ? v : -std::numeric_limits<Scalar>::infinity();
  } catch (const std::domain_error&) {
    return -std::numeric_limits<Scalar>::infinity();
  } catch (const std::invalid_argument&) {
    return -std::numeric_limits<Scalar>::infinity();
  }
}

}  // namespace detail

template <typename Scalar>
BfgsTrace<Scalar> bfgs_maximize(const std::function<Scalar(const VectorX<Scalar>&)>& objective,
                                const std::function<VectorX<Scalar>(const VectorX<Scalar>&)>& gradient,
                                VectorX<Scalar> x0, const OptimOptions& opts) {
  opts.validate();
  BfgsTrace<Scalar> out;
  const Eigen::Index k = x0.size();
  // Work with f = -objective and minimize.
  Scalar f = -detail::safe_value(objective, x0);
  if (!std::isfinite(f)) throw std::domain_error("bfgs_maximize: objective is not finite at the start");
  VectorX<Scalar> g;
  if (!detail::try_gradient(gradient, x0, g)) {
    throw std::domain_error("bfgs_maximize: gradient is not finite at the start");
  }
  g = -g;
  VectorX<Scalar> x = std::move(x0);
  MatrixX<Scalar> H = MatrixX<Scalar>::Identity(k, k);
  bool scaled = false;
  out.history.push_back(-f);

  auto finish = [&](bool converged, std::string msg) {
    out.x = x;
    out.value = -f;
    out.converged = converged;
    out.gradient_norm = k ? g.cwiseAbs().maxCoeff() : Scalar(0);
    out.message = std::move(msg);
    return out;
  };

  if (k == 0) return finish(true, "no free parameters");

  bool restarted = false;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    out.iterations = iter;
    const Scalar gmax = g.cwiseAbs().maxCoeff();
    if (gmax <= opts.gradient_tolerance) return finish(true, "gradient tolerance reached");

    VectorX<Scalar> d = -H * g;
    Scalar slope = g.dot(d);
    if (!(slope < 0)) {
      H.setIdentity();
      d = -g;
      slope = g.dot(d);
    }
    Scalar alpha = 1;
    if (!scaled) alpha = std::min(Scalar(1), Scalar(1) / d.cwiseAbs().maxCoeff());

    // Backtracking: Armijo, or, once the predicted decrease drops below the
    // rounding level of f, an approximate Wolfe test on the directional
    // derivative.
    const Scalar noise = Scalar(1e-11) * (Scalar(1) + std::abs(f));
    const Scalar xscale = std::max(Scalar(1), x.cwiseAbs().maxCoeff());
    bool accepted = false;
    VectorX<Scalar> x_new, g_new;
    Scalar f_new = 0;
    while (alpha * d.cwiseAbs().maxCoeff() >= opts.step_tolerance * xscale) {
      x_new = x + alpha * d;
      f_new = -detail::safe_value(objective, x_new);
      if (std::isfinite(f_new)) {
        if (f_new <= f + opts.armijo * alpha * slope) {
          if (detail::try_gradient(gradient, x_new, g_new)) {
            g_new = -g_new;
            accepted = true;
            break;
          }
        } else if (f_new <= f + noise && std::abs(alpha * slope) <= noise) {
          if (detail::try_gradient(gradient, x_new, g_new)) {
            g_new = -g_new;
            const Scalar slope_new = g_new.dot(d);
            if (slope_new >= Scalar(0.9) * slope && slope_new <= -Scalar(0.8) * slope &&
                g_new.cwiseAbs().maxCoeff() < gmax) {
              accepted = true;
              break;
            }
          }
        }
      }
      alpha *= opts.contraction;
    }

    if (!accepted) {
      if (!restarted) {
        // One retry along steepest descent with a fresh curvature model.
        restarted = true;
        H.setIdentity();
        scaled = false;
        continue;
      }
      return finish(false, "line search failed");
    }
    restarted = false;

    const VectorX<Scalar> s = x_new - x;
    const VectorX<Scalar> y = g_new - g;
    const Scalar sy = s.dot(y);
    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
    out.history.push_back(-f_new);
    if (sy > Scalar(1e-10) * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const Scalar rho = Scalar(1) / sy;
      const VectorX<Scalar> Hy = H * y;
      const Scalar yHy = y.dot(Hy);
      H += ((sy + yHy) * rho * rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
      H = Scalar(0.5) * (H + H.transpose()).eval();
    } else {
      ++out.skipped_updates;
    }
  }
  out.iterations = opts.max_iterations;
  if (g.cwiseAbs().maxCoeff() <= opts.gradient_tolerance) return finish(true, "gradient tolerance reached");
  return finish(false, "iteration limit reached");
}

}  // namespace tobitls
