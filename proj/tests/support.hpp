#pragma once

// Shared fixtures for the unit tests and the acceptance suite.

#include "tobitls/mcsim.hpp"
#include "tobitls/model.hpp"
#include "tobitls/optimize.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace tobitls::testing {

inline std::vector<GeneratorFamily> model_families() {
  return {GeneratorFamily::normal(), GeneratorFamily::student_t(4.0), GeneratorFamily::power_exponential(0.5),
          GeneratorFamily::birnbaum_saunders(1.0), GeneratorFamily::birnbaum_saunders_t(1.0, 4.0)};
}

/// Random theta (and dataset drawn near it) for derivative checks: p = 3,
/// roughly `rho` of the cases censored. Free extras are perturbed away from
/// their defaults so their derivatives are exercised.
struct DerivativeCase {
  Theta theta;
  TobitDataset data;
};

inline DerivativeCase random_case(const GeneratorFamily& base, Eigen::Index n, double rho, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd beta(3);
  beta << -0.5 + u(rng), 0.5 + u(rng), -1.0 + 2.0 * u(rng);
  GeneratorFamily fam = base;
  if (base.kind() == GeneratorKind::BirnbaumSaunders) fam = base.with_xi(0, 0.4 + 1.5 * u(rng));
  if (base.kind() == GeneratorKind::BirnbaumSaundersT) fam = base.with_xi(0, 0.4 + 1.5 * u(rng));
  const double phi = fam.fixed_dispersion().value_or(0.5 + 1.5 * u(rng));
  TobitDataset data = simulate_dataset(fam, n, beta, phi, rho, rng);
  // Evaluate away from the generating values as well.
  Eigen::VectorXd b = beta;
  for (Eigen::Index j = 0; j < b.size(); ++j) b[j] += 0.2 * (u(rng) - 0.5);
  const double phi_eval = fam.fixed_dispersion().value_or(phi * (0.8 + 0.4 * u(rng)));
  return {Theta::make(b, phi_eval, fam), std::move(data)};
}

/// max_i |a_i - b_i| / max(1, |b_i|).
inline double max_rel_dev(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return ((a - b).array().abs() / b.array().abs().max(1.0)).maxCoeff();
}

/// Gradient of loglik in the packed layout by central differences.
inline Eigen::VectorXd fd_score(const Theta& theta, const TobitDataset& data, double h = 1e-6) {
  const Eigen::VectorXd x = pack(theta);
  return numerical_gradient<double>([&](const Eigen::VectorXd& v) { return loglik(unpack(theta, v), data); }, x, h);
}

inline Eigen::MatrixXd fd_hessian(const Theta& theta, const TobitDataset& data, double h = 1e-6) {
  const Eigen::VectorXd x = pack(theta);
  return numerical_jacobian<double>([&](const Eigen::VectorXd& v) { return score(unpack(theta, v), data); }, x, h);
}

}  // namespace tobitls::testing
