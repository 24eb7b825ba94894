#pragma once

// Standard errors, information criteria, and the likelihood-ratio and
// gradient tests.

#include "tobitls/errors.hpp"
#include "tobitls/model.hpp"
#include "tobitls/optimize.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace tobitls {

struct FitResult {
  Theta theta_hat;
  std::vector<std::string> names;  // aligned with pack(theta_hat)
  std::vector<bool> fixed;         // coordinates held fixed during the fit
  Eigen::VectorXd se;              // NaN where unavailable, 0 for fixed coordinates
  std::string se_error;            // non-empty when the information was not invertible
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  Eigen::Index n_total = 0;
  Eigen::Index n_censored = 0;
  Eigen::Index free_parameters = 0;
  OptimResult optim;
};

/// SEs from the inverse observed information for the coordinates not marked
/// in `fixed`. Transformed coordinates (log phi, extras) go through the delta
/// method. Throws InformationError when -H is not positive definite.
Eigen::VectorXd standard_errors(const Theta& theta_hat, const TobitDataset& data,
                                const OptimOptions& opts = {}, const std::vector<bool>& fixed = {});

/// Fits by BFGS from `start` (or starting_values when absent). Throws
/// NumericalError when the optimizer does not converge.
FitResult fit_model(const TobitDataset& data, const GeneratorFamily& family,
                    const OptimOptions& opts = {}, const std::optional<Theta>& start = std::nullopt,
                    const std::vector<bool>& fixed = {});

/// Fit statistics for an already-estimated theta (no optimization).
FitResult summarize_fit(const TobitDataset& data, OptimResult optim, const OptimOptions& opts,
                        const std::vector<bool>& fixed = {});

/// H0 fixes packed coordinates `indices` at `values`.
struct Restriction {
  std::vector<Eigen::Index> indices;
  std::vector<double> values;
};

enum class TestKind { LR, GR };

struct TestResult {
  TestKind kind = TestKind::LR;
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::vector<std::string> warnings;
  FitResult restricted;
  FitResult unrestricted;
};

/// Upper-tail probability of chi-square with r degrees of freedom.
double chi2_upper_tail(double x, int r);

/// Restricted fit warm-started from the unrestricted optimum, with a fallback
/// to starting_values.
FitResult fit_restricted(const TobitDataset& data, const FitResult& unrestricted,
                         const Restriction& restriction, const OptimOptions& opts = {});

/// 2 (l(theta_hat) - l(theta_tilde)).
double lr_statistic(const FitResult& unrestricted, const FitResult& restricted);
/// score(theta_tilde)' (theta_hat - theta_tilde) on the natural scale.
double gr_statistic(const TobitDataset& data, const FitResult& unrestricted,
                    const FitResult& restricted);

TestResult make_test(TestKind kind, const TobitDataset& data, const FitResult& unrestricted,
                     const FitResult& restricted);

TestResult lr_test(const TobitDataset& data, const GeneratorFamily& family,
                   const Restriction& restriction, const OptimOptions& opts = {});
TestResult gr_test(const TobitDataset& data, const GeneratorFamily& family,
                   const Restriction& restriction, const OptimOptions& opts = {});

/// Both tests sharing one unrestricted and one restricted fit.
std::vector<TestResult> run_tests(const TobitDataset& data, const GeneratorFamily& family,
                                  const Restriction& restriction, const std::vector<TestKind>& kinds,
                                  const OptimOptions& opts = {});

}  // namespace tobitls
