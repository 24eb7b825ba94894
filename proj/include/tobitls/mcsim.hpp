#pragma once

// Monte Carlo harness: bias/MSE of the ML estimators and size/power of the
// LR and GR tests, with deterministic parallel replication.

#include "tobitls/infer.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tobitls {

/// Intercept plus beta.size() - 1 covariates drawn U(0, 1), errors phi * z
/// with z ~ S(0, 1, g), and the threshold set so that exactly round(rho n)
/// cases are censored (rho = 0 puts it one unit below the smallest Y*).
TobitDataset simulate_dataset(const GeneratorFamily& family, Eigen::Index n, const Eigen::VectorXd& beta,
                              double phi, double rho, Rng& rng);

/// Same, with a given design matrix (intercept column included by the caller).
TobitDataset simulate_dataset(const GeneratorFamily& family, const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                              double phi, double rho, Rng& rng);

struct BiasMseConfig {
  GeneratorFamily family = GeneratorFamily::normal();
  std::vector<Eigen::Index> n_grid{50, 100, 300, 500};
  std::vector<double> phi_grid{1.0, 3.0, 5.0};
  std::vector<double> rho_grid{0.20, 0.50};
  Eigen::VectorXd beta_true = (Eigen::VectorXd(2) << 0.2, 0.5).finished();
  int replications = 5000;
  std::uint64_t seed = 20240101;
  int threads = 0;
  /// Draw the covariates once per cell instead of once per replication.
  bool fixed_design = false;
  OptimOptions optim;

  void validate() const;
};

struct PowerConfig {
  GeneratorFamily family = GeneratorFamily::normal();
  std::vector<Eigen::Index> n_grid{50, 100, 300, 500};
  double phi = 3.0;
  std::vector<double> rho_grid{0.20, 0.50};
  /// beta_0 .. beta_3; beta_4 comes from beta4_grid.
  Eigen::VectorXd beta_true = (Eigen::VectorXd(4) << 1.0, 1.5, 0.5, 0.8).finished();
  std::vector<double> beta4_grid{-1.00, -0.75, -0.25, 0.00, 0.25, 0.75, 1.00};
  std::vector<double> nominal_levels{0.01, 0.05, 0.10};
  int replications = 5000;
  std::uint64_t seed = 20240202;
  int threads = 0;
  bool fixed_design = false;
  OptimOptions optim;

  void validate() const;
};

struct BiasMseRow {
  Eigen::Index n = 0;
  double phi = 0.0;
  double rho = 0.0;
  std::string parameter;
  double true_value = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  double bias_mc_se = 0.0;
  double mse_mc_se = 0.0;
  int replications = 0;  // successful replications used
  int failures = 0;      // replications lost after the redraw budget
  int redraws = 0;
};

struct PowerRow {
  Eigen::Index n = 0;
  double phi = 0.0;
  double rho = 0.0;
  double beta4 = 0.0;
  double level = 0.0;
  double rejection_lr = 0.0;
  double rejection_gr = 0.0;
  double mc_se_lr = 0.0;
  double mc_se_gr = 0.0;
  int replications = 0;
  int failures = 0;
  int redraws = 0;
};

struct McReport {
  std::string study;  // "bias-mse" or "power"
  std::string family;
  std::uint64_t seed = 0;
  int replications = 0;
  bool fixed_design = false;
  std::vector<BiasMseRow> bias_rows;
  std::vector<PowerRow> power_rows;
};

/// Runs every (n, phi, rho) cell. Cells that differ only in phi use the same
/// random streams (common random numbers). Non-converged replications are redrawn
/// within a budget of ceil(1% of replications) per cell; losses beyond the
/// budget throw NumericalError.
McReport run_bias_mse(const BiasMseConfig& config);

/// Runs every (n, rho, beta4) cell, fitting the unrestricted model and the
/// restricted model with beta4 = 0, and reports rejection rates at each
/// nominal level against chi-square(1) critical values.
McReport run_power(const PowerConfig& config);

/// Raw per-replication estimates for one bias/MSE cell (used by the tests).
struct CellDraws {
  Eigen::MatrixXd estimates;  // replications x (1 + p): phi, beta...
  int failures = 0;
  int redraws = 0;
};
CellDraws bias_mse_cell(const BiasMseConfig& config, Eigen::Index n, double phi, double rho,
                        std::uint64_t cell_id);

/// Raw per-replication statistics for one power cell: columns LR, GR.
struct PowerDraws {
  Eigen::MatrixXd statistics;
  int failures = 0;
  int redraws = 0;
};
PowerDraws power_cell(const PowerConfig& config, Eigen::Index n, double rho, double beta4, std::uint64_t cell_id);

}  // namespace tobitls
