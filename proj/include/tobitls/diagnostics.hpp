#pragma once

// Generalized Cox-Snell residuals and simulated QQ envelopes.

#include "tobitls/infer.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace tobitls {

/// Treatment of censored cases. By default the residual is evaluated at the
/// recorded threshold, like every other case.
enum class CensoredAdjustment {
  None,
  /// Adds 1, the usual right-censoring convention.
  PlusOne,
  /// E[r | r <= r_c] for a unit exponential r, the left-censoring analogue.
  ConditionalMean,
};

struct ResidualReport {
  Eigen::VectorXd residuals;
  std::vector<bool> censored_flags;
  /// Set where the survival probability underflowed and the residual was
  /// capped at -log(machine epsilon).
  std::vector<bool> capped_flags;
  /// One-sample Kolmogorov-Smirnov against EXP(1), over all residuals.
  double ks_statistic = 0.0;
  double ks_pvalue = 1.0;
};

/// r_i = -log(1 - F_Z(zeta_i)) at theta, with zeta_i the standardized value
/// of the recorded datum (the threshold for censored cases).
ResidualReport gcs_residuals(const Theta& theta, const TobitDataset& data,
                             CensoredAdjustment adjustment = CensoredAdjustment::None);
ResidualReport gcs_residuals(const FitResult& fit, const TobitDataset& data,
                             CensoredAdjustment adjustment = CensoredAdjustment::None);

/// sup |F_n - F| against the unit exponential, and its asymptotic p-value
/// (Kolmogorov limit with the Stephens small-sample correction).
double ks_statistic_exp1(Eigen::VectorXd sample);
double kolmogorov_pvalue(double d, Eigen::Index n);

/// Sample quantile with linear interpolation between order statistics
/// (type 7). `sorted` must be ascending.
double quantile_type7(const std::vector<double>& sorted, double prob);

struct EnvelopeOptions {
  int replications = 100;
  double level = 0.95;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: resolve_threads default
  CensoredAdjustment adjustment = CensoredAdjustment::None;
  OptimOptions optim;
};

struct EnvelopeBand {
  /// EXP(1) quantiles at plotting positions i / (n + 1).
  Eigen::VectorXd theoretical_quantiles;
  Eigen::VectorXd lower, median, upper;
  /// Observed residuals in ascending order, with their original row index.
  Eigen::VectorXd observed;
  std::vector<Eigen::Index> order;
  std::vector<bool> observed_censored;
  double coverage_level = 0.95;
  int replications = 0;
  int failures = 0;
};

/// Simulates datasets from the fitted model (same X, threshold and censoring
/// rule), refits each, and summarizes the sorted residuals pointwise.
/// Throws NumericalError when more than 10% of the refits fail.
EnvelopeBand qq_envelope(const FitResult& fit, const TobitDataset& data, const EnvelopeOptions& opts = {});

/// Draws a dataset from theta with the design and threshold of `like`.
TobitDataset simulate_like(const Theta& theta, const TobitDataset& like, Rng& rng);

}  // namespace tobitls
