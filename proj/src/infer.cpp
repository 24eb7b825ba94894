#include "tobitls/infer.hpp"

#include "tobitls/special.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tobitls {

namespace {

std::vector<Eigen::Index> free_indices(Eigen::Index size, const std::vector<bool>& fixed) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < size; ++j) {
    if (fixed.empty() || !fixed[static_cast<std::size_t>(j)]) idx.push_back(j);
  }
  return idx;
}

}  // namespace

Eigen::VectorXd standard_errors(const Theta& theta_hat, const TobitDataset& data, const OptimOptions& opts,
                                const std::vector<bool>& fixed) {
  const Eigen::VectorXd nat = pack(theta_hat);
  const Eigen::Index k = nat.size();
  if (!fixed.empty() && static_cast<Eigen::Index>(fixed.size()) != k) {
    throw std::invalid_argument("fixed mask must match the packed parameter layout");
  }
  const auto idx = free_indices(k, fixed);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd se = Eigen::VectorXd::Zero(k);
  if (m == 0) return se;

  const Eigen::MatrixXd H = hessian(theta_hat, data);
  const Eigen::VectorXd g = score(theta_hat, data);
  const auto map = working_transforms(theta_hat, opts);

  // Observed information in the working coordinates.
  Eigen::MatrixXd J(m, m);
  Eigen::VectorXd d1(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto ja = idx[static_cast<std::size_t>(a)];
    d1[a] = working_d1(map[static_cast<std::size_t>(ja)], nat[ja]);
  }
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      J(a, b) = -H(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]) * d1[a] * d1[b];
    }
    const auto ja = idx[static_cast<std::size_t>(a)];
    J(a, a) -= g[ja] * working_d2(map[static_cast<std::size_t>(ja)], nat[ja]);
  }
  J = 0.5 * (J + J.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  if (eig.info() != Eigen::Success) {
    throw InformationError("observed information: eigen decomposition failed",
                           std::numeric_limits<double>::quiet_NaN());
  }
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > lmax * 1e-13) || !std::isfinite(lmax)) {
    std::ostringstream msg;
    msg << "observed information is not positive definite (smallest eigenvalue " << lmin << ")";
    throw InformationError(msg.str(), lmin);
  }
  const Eigen::MatrixXd cov =
      eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  for (Eigen::Index a = 0; a < m; ++a) {
    se[idx[static_cast<std::size_t>(a)]] = std::abs(d1[a]) * std::sqrt(cov(a, a));
  }
  return se;
}

FitResult summarize_fit(const TobitDataset& data, OptimResult optim, const OptimOptions& opts,
                        const std::vector<bool>& fixed) {
  FitResult r;
  r.theta_hat = optim.theta_hat;
  r.names = parameter_names(r.theta_hat, data);
  const auto k = static_cast<Eigen::Index>(r.names.size());
  r.fixed = fixed.empty() ? std::vector<bool>(static_cast<std::size_t>(k), false) : fixed;
  r.free_parameters = static_cast<Eigen::Index>(free_indices(k, fixed).size());
  r.loglik = loglik(r.theta_hat, data);
  r.n_total = data.n();
  r.n_censored = data.n_censored();
  const auto kk = static_cast<double>(r.free_parameters);
  r.aic = -2.0 * r.loglik + 2.0 * kk;
  r.bic = -2.0 * r.loglik + kk * std::log(static_cast<double>(r.n_total));
  try {
    r.se = standard_errors(r.theta_hat, data, opts, fixed);
  } catch (const NumericalError& e) {
    r.se = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
    r.se_error = e.what();
  }
  r.optim = std::move(optim);
  return r;
}

FitResult fit_model(const TobitDataset& data, const GeneratorFamily& family, const OptimOptions& opts,
                    const std::optional<Theta>& start, const std::vector<bool>& fixed) {
  const Theta theta0 = start ? *start : starting_values(data, family);
  OptimResult opt = maximize_loglik(data, theta0, opts, fixed);
  if (!opt.converged) {
    std::ostringstream msg;
    msg << "optimizer did not converge: " << opt.message << " after " << opt.iterations
        << " iterations, max |gradient| = " << opt.final_gradient_norm;
    throw NumericalError(msg.str());
  }
  return summarize_fit(data, std::move(opt), opts, fixed);
}

double chi2_upper_tail(double x, int r) { return special::chi2_upper_tail(x, r); }

FitResult fit_restricted(const TobitDataset& data, const FitResult& unrestricted, const Restriction& restriction,
                         const OptimOptions& opts) {
  const Eigen::Index k = pack(unrestricted.theta_hat).size();
  if (restriction.indices.empty() || restriction.indices.size() != restriction.values.size()) {
    throw std::invalid_argument("restriction needs matching, non-empty index and value lists");
  }
  std::vector<bool> fixed(static_cast<std::size_t>(k), false);
  for (const auto j : restriction.indices) {
    if (j < 0 || j >= k) throw std::invalid_argument("restriction index out of range");
    if (fixed[static_cast<std::size_t>(j)]) throw std::invalid_argument("restriction index repeated");
    fixed[static_cast<std::size_t>(j)] = true;
  }

  auto overwrite = [&](const Theta& base) {
    Eigen::VectorXd v = pack(base);
    for (std::size_t i = 0; i < restriction.indices.size(); ++i) v[restriction.indices[i]] = restriction.values[i];
    return unpack(base, v);
  };

  std::string first_error;
  try {
    return fit_model(data, unrestricted.theta_hat.family, opts, overwrite(unrestricted.theta_hat), fixed);
  } catch (const NumericalError& e) {
    first_error = e.what();
  } catch (const std::domain_error& e) {
    first_error = e.what();
  }
  try {
    Theta cold = starting_values(data, unrestricted.theta_hat.family);
    cold.free_extra = unrestricted.theta_hat.free_extra;
    return fit_model(data, unrestricted.theta_hat.family, opts, overwrite(cold), fixed);
  } catch (const NumericalError& e) {
    throw NumericalError("restricted fit failed (warm start: " + first_error + "; cold start: " + e.what() + ")");
  } catch (const std::domain_error& e) {
    throw NumericalError("restricted fit failed (warm start: " + first_error + "; cold start: " + e.what() + ")");
  }
}

double lr_statistic(const FitResult& unrestricted, const FitResult& restricted) {
  return 2.0 * (unrestricted.loglik - restricted.loglik);
}

double gr_statistic(const TobitDataset& data, const FitResult& unrestricted, const FitResult& restricted) {
  const Eigen::VectorXd s = score(restricted.theta_hat, data);
  return s.dot(pack(unrestricted.theta_hat) - pack(restricted.theta_hat));
}

TestResult make_test(TestKind kind, const TobitDataset& data, const FitResult& unrestricted,
                     const FitResult& restricted) {
  TestResult t;
  t.kind = kind;
  t.df = 0;
  for (std::size_t j = 0; j < restricted.fixed.size(); ++j) {
    const bool was_free = unrestricted.fixed.empty() || !unrestricted.fixed[j];
    if (restricted.fixed[j] && was_free) ++t.df;
  }
  if (t.df < 1) throw std::invalid_argument("restriction leaves no degrees of freedom");
  if (kind == TestKind::LR) {
    double stat = lr_statistic(unrestricted, restricted);
    if (stat < 0.0) {
      if (stat >= -1e-8) {
        stat = 0.0;
      } else {
        t.warnings.emplace_back("negative_lr_statistic");
      }
    }
    t.statistic = stat;
  } else {
    t.statistic = gr_statistic(data, unrestricted, restricted);
    if (t.statistic < 0.0) t.warnings.emplace_back("negative_gr_statistic");
  }
  t.p_value = chi2_upper_tail(std::max(0.0, t.statistic), t.df);
  t.restricted = restricted;
  t.unrestricted = unrestricted;
  return t;
}

std::vector<TestResult> run_tests(const TobitDataset& data, const GeneratorFamily& family,
                                  const Restriction& restriction, const std::vector<TestKind>& kinds,
                                  const OptimOptions& opts) {
  const FitResult full = fit_model(data, family, opts);
  const FitResult restricted = fit_restricted(data, full, restriction, opts);
  std::vector<TestResult> out;
  out.reserve(kinds.size());
  for (const auto kind : kinds) out.push_back(make_test(kind, data, full, restricted));
  return out;
}

TestResult lr_test(const TobitDataset& data, const GeneratorFamily& family, const Restriction& restriction,
                   const OptimOptions& opts) {
  return run_tests(data, family, restriction, {TestKind::LR}, opts).front();
}

TestResult gr_test(const TobitDataset& data, const GeneratorFamily& family, const Restriction& restriction,
                   const OptimOptions& opts) {
  return run_tests(data, family, restriction, {TestKind::GR}, opts).front();
}

}  // namespace tobitls
