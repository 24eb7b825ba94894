#include "tobitls/mcsim.hpp"

#include "tobitls/parallel.hpp"
#include "tobitls/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tobitls {

namespace {

constexpr std::uint64_t kDesignAttempt = std::numeric_limits<std::uint64_t>::max();

Eigen::MatrixXd draw_design(Eigen::Index n, Eigen::Index p, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) X(i, j) = unif(rng);
  }
  return X;
}

std::vector<std::string> design_names(Eigen::Index p) {
  std::vector<std::string> names{"intercept"};
  for (Eigen::Index j = 1; j < p; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

bool is_recoverable(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const NumericalError&) {
    return true;
  } catch (const std::domain_error&) {
    return true;
  } catch (const std::invalid_argument&) {
    return true;
  } catch (...) {
    return false;
  }
}

struct RedrawOutcome {
  std::vector<bool> ok;
  int failures = 0;
  int redraws = 0;
};

// Runs attempt(r, a) for every replication r; failed slots (in ascending
// order) are retried with fresh attempt numbers until the redraw budget is
// spent. The outcome depends only on the seeds, never on scheduling.
template <typename Attempt>
RedrawOutcome replicate(int replications, int threads, Attempt&& attempt) {
  const auto reps = static_cast<std::size_t>(replications);
  RedrawOutcome out;
  out.ok.assign(reps, false);
  std::vector<std::uint64_t> tries(reps, 0);
  std::vector<char> ok(reps, 0);
  auto run = [&](const std::vector<std::size_t>& slots) {
    parallel_for(slots.size(), threads, [&](std::size_t k) {
      const std::size_t r = slots[k];
      try {
        attempt(r, tries[r]);
        ok[r] = 1;
      } catch (...) {
        if (!is_recoverable(std::current_exception())) throw;
        ok[r] = 0;
      }
      ++tries[r];
    });
  };
  std::vector<std::size_t> pending(reps);
  for (std::size_t r = 0; r < reps; ++r) pending[r] = r;
  run(pending);

  const int budget = static_cast<int>(std::ceil(0.01 * replications));
  for (;;) {
    std::vector<std::size_t> failed;
    for (std::size_t r = 0; r < reps; ++r) {
      if (!ok[r]) failed.push_back(r);
    }
    const int left = budget - out.redraws;
    if (failed.empty() || left <= 0) {
      out.failures = static_cast<int>(failed.size());
      break;
    }
    if (static_cast<int>(failed.size()) > left) failed.resize(static_cast<std::size_t>(left));
    out.redraws += static_cast<int>(failed.size());
    run(failed);
  }
  for (std::size_t r = 0; r < reps; ++r) out.ok[r] = ok[r] != 0;
  if (out.failures > budget) {
    std::ostringstream msg;
    msg << "failure budget exceeded: " << out.failures << " of " << replications
        << " replications failed after " << out.redraws << " redraws (budget " << budget << ")";
    throw NumericalError(msg.str());
  }
  return out;
}

void check_grid(const std::vector<double>& rho_grid, int replications, const std::vector<Eigen::Index>& n_grid) {
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (n_grid.empty() || rho_grid.empty()) throw std::invalid_argument("empty simulation grid");
  for (const double rho : rho_grid) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("censoring proportions must lie in (0, 1)");
  }
  for (const auto n : n_grid) {
    if (n < 2) throw std::invalid_argument("sample sizes must be >= 2");
  }
}

}  // namespace

TobitDataset simulate_dataset(const GeneratorFamily& family, const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                              double phi, double rho, Rng& rng) {
  const Eigen::Index n = X.rows();
  if (X.cols() != beta.size()) throw std::invalid_argument("simulate_dataset: X and beta disagree in size");
  if (!(phi > 0.0)) throw std::invalid_argument("simulate_dataset: phi must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("simulate_dataset: rho must lie in [0, 1)");
  if (n < 1) throw std::invalid_argument("simulate_dataset: n must be positive");
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const bool constant = X.col(j).maxCoeff() == X.col(j).minCoeff();
    const bool intercept = constant && X(0, j) == 1.0 && j == 0;
    if (constant && !intercept && n > 1) {
      throw std::invalid_argument("simulate_dataset: degenerate design (column " + std::to_string(j) +
                                  " is constant)");
    }
  }
  const Eigen::VectorXd ystar = X * beta + phi * sym_sample(family, rng, n);
  const auto m = static_cast<Eigen::Index>(std::llround(rho * static_cast<double>(n)));
  double gamma = 0.0;
  if (m == 0) {
    gamma = ystar.minCoeff() - 1.0;
  } else {
    std::vector<double> sorted(ystar.data(), ystar.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + (m - 1), sorted.end());
    gamma = sorted[static_cast<std::size_t>(m - 1)];
  }
  Eigen::VectorXd y = ystar;
  std::vector<bool> censored(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ystar[i] <= gamma) {
      censored[static_cast<std::size_t>(i)] = true;
      y[i] = gamma;
    }
  }
  return TobitDataset::create(std::move(y), std::move(censored), X, gamma, design_names(X.cols()));
}

TobitDataset simulate_dataset(const GeneratorFamily& family, Eigen::Index n, const Eigen::VectorXd& beta,
                              double phi, double rho, Rng& rng) {
  if (beta.size() < 1) throw std::invalid_argument("simulate_dataset: beta must include an intercept");
  const Eigen::MatrixXd X = draw_design(n, beta.size(), rng);
  return simulate_dataset(family, X, beta, phi, rho, rng);
}

void BiasMseConfig::validate() const {
  check_grid(rho_grid, replications, n_grid);
  if (phi_grid.empty()) throw std::invalid_argument("empty phi grid");
  for (const double phi : phi_grid) {
    if (!(phi > 0.0)) throw std::invalid_argument("phi values must be positive");
    if (const auto fixed = family.fixed_dispersion(); fixed && phi != *fixed) {
      throw std::invalid_argument("this family fixes phi; phi_grid must contain only that value");
    }
  }
  if (beta_true.size() < 1) throw std::invalid_argument("beta_true must include an intercept");
  optim.validate();
}

void PowerConfig::validate() const {
  check_grid(rho_grid, replications, n_grid);
  if (!(phi > 0.0)) throw std::invalid_argument("phi must be positive");
  if (const auto fixed = family.fixed_dispersion(); fixed && phi != *fixed) {
    throw std::invalid_argument("this family fixes phi at " + std::to_string(*fixed));
  }
  if (beta_true.size() < 1) throw std::invalid_argument("beta_true must include an intercept");
  if (beta4_grid.empty() || nominal_levels.empty()) throw std::invalid_argument("empty power grid");
  for (const double a : nominal_levels) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("nominal levels must lie in (0, 1)");
  }
  optim.validate();
}

CellDraws bias_mse_cell(const BiasMseConfig& config, Eigen::Index n, double phi, double rho, std::uint64_t cell_id) {
  const Eigen::Index p = config.beta_true.size();
  std::optional<Eigen::MatrixXd> design;
  if (config.fixed_design) {
    Rng rng = substream(config.seed, cell_id, 0, kDesignAttempt);
    design = draw_design(n, p, rng);
  }
  CellDraws out;
  out.estimates.resize(config.replications, 1 + p);
  const auto outcome = replicate(config.replications, resolve_threads(config.threads),
                                 [&](std::size_t r, std::uint64_t attempt) {
    Rng rng = substream(config.seed, cell_id, r, attempt);
    const TobitDataset data = design ? simulate_dataset(config.family, *design, config.beta_true, phi, rho, rng)
                                     : simulate_dataset(config.family, n, config.beta_true, phi, rho, rng);
    const OptimResult opt = maximize_loglik(data, starting_values(data, config.family), config.optim);
    if (!opt.converged) throw NumericalError(opt.message);
    const auto row = static_cast<Eigen::Index>(r);
    out.estimates(row, 0) = opt.theta_hat.phi;
    out.estimates.row(row).tail(p) = opt.theta_hat.beta.transpose();
  });
  out.failures = outcome.failures;
  out.redraws = outcome.redraws;
  if (out.failures > 0) {
    // Keep successful rows only.
    Eigen::MatrixXd kept(config.replications - out.failures, 1 + p);
    Eigen::Index k = 0;
    for (std::size_t r = 0; r < outcome.ok.size(); ++r) {
      if (outcome.ok[r]) kept.row(k++) = out.estimates.row(static_cast<Eigen::Index>(r));
    }
    out.estimates = std::move(kept);
  }
  return out;
}

McReport run_bias_mse(const BiasMseConfig& config) {
  config.validate();
  McReport report;
  report.study = "bias-mse";
  report.family = config.family.name();
  report.seed = config.seed;
  report.replications = config.replications;
  report.fixed_design = config.fixed_design;
  const Eigen::Index p = config.beta_true.size();
  // Cells that differ only in phi share their random streams.
  for (std::size_t in = 0; in < config.n_grid.size(); ++in) {
    const Eigen::Index n = config.n_grid[in];
    for (const double phi : config.phi_grid) {
      for (std::size_t ir = 0; ir < config.rho_grid.size(); ++ir) {
        const double rho = config.rho_grid[ir];
        const std::uint64_t cell_id = in * config.rho_grid.size() + ir;
        const CellDraws draws = bias_mse_cell(config, n, phi, rho, cell_id);
        const auto used = draws.estimates.rows();
        for (Eigen::Index j = 0; j < 1 + p; ++j) {
          BiasMseRow row;
          row.n = n;
          row.phi = phi;
          row.rho = rho;
          row.parameter = j == 0 ? "phi" : "beta" + std::to_string(j - 1);
          row.true_value = j == 0 ? phi : config.beta_true[j - 1];
          const Eigen::ArrayXd err = draws.estimates.col(j).array() - row.true_value;
          const Eigen::ArrayXd sq = err.square();
          row.bias = err.mean();
          row.mse = sq.mean();
          if (used > 1) {
            const double denom = static_cast<double>(used - 1);
            const double rn = std::sqrt(static_cast<double>(used));
            row.bias_mc_se = std::sqrt((err - row.bias).square().sum() / denom) / rn;
            row.mse_mc_se = std::sqrt((sq - row.mse).square().sum() / denom) / rn;
          }
          row.replications = static_cast<int>(used);
          row.failures = draws.failures;
          row.redraws = draws.redraws;
          report.bias_rows.push_back(std::move(row));
        }
      }
    }
  }
  return report;
}

PowerDraws power_cell(const PowerConfig& config, Eigen::Index n, double rho, double beta4, std::uint64_t cell_id) {
  Eigen::VectorXd beta(config.beta_true.size() + 1);
  beta << config.beta_true, beta4;
  const Eigen::Index p = beta.size();
  std::optional<Eigen::MatrixXd> design;
  if (config.fixed_design) {
    Rng rng = substream(config.seed, cell_id, 0, kDesignAttempt);
    design = draw_design(n, p, rng);
  }
  const Restriction h0{{p - 1}, {0.0}};
  PowerDraws out;
  out.statistics.resize(config.replications, 2);
  const auto outcome = replicate(config.replications, resolve_threads(config.threads),
                                 [&](std::size_t r, std::uint64_t attempt) {
    Rng rng = substream(config.seed, cell_id, r, attempt);
    const TobitDataset data = design ? simulate_dataset(config.family, *design, beta, config.phi, rho, rng)
                                     : simulate_dataset(config.family, n, beta, config.phi, rho, rng);
    const FitResult full = fit_model(data, config.family, config.optim);
    const FitResult restricted = fit_restricted(data, full, h0, config.optim);
    const auto row = static_cast<Eigen::Index>(r);
    out.statistics(row, 0) = lr_statistic(full, restricted);
    out.statistics(row, 1) = gr_statistic(data, full, restricted);
  });
  out.failures = outcome.failures;
  out.redraws = outcome.redraws;
  if (out.failures > 0) {
    Eigen::MatrixXd kept(config.replications - out.failures, 2);
    Eigen::Index k = 0;
    for (std::size_t r = 0; r < outcome.ok.size(); ++r) {
      if (outcome.ok[r]) kept.row(k++) = out.statistics.row(static_cast<Eigen::Index>(r));
    }
    out.statistics = std::move(kept);
  }
  return out;
}

McReport run_power(const PowerConfig& config) {
  config.validate();
  McReport report;
  report.study = "power";
  report.family = config.family.name();
  report.seed = config.seed;
  report.replications = config.replications;
  report.fixed_design = config.fixed_design;
  std::uint64_t cell_id = 0;
  for (const auto n : config.n_grid) {
    for (const double rho : config.rho_grid) {
      for (const double b4 : config.beta4_grid) {
        const PowerDraws draws = power_cell(config, n, rho, b4, cell_id++);
        const auto used = draws.statistics.rows();
        for (const double level : config.nominal_levels) {
          const double crit = special::chi2_upper_quantile(level, 1);
          PowerRow row;
          row.n = n;
          row.phi = config.phi;
          row.rho = rho;
          row.beta4 = b4;
          row.level = level;
          const double denom = static_cast<double>(std::max<Eigen::Index>(used, 1));
          row.rejection_lr = static_cast<double>((draws.statistics.col(0).array() > crit).count()) / denom;
          row.rejection_gr = static_cast<double>((draws.statistics.col(1).array() > crit).count()) / denom;
          row.mc_se_lr = std::sqrt(row.rejection_lr * (1.0 - row.rejection_lr) / denom);
          row.mc_se_gr = std::sqrt(row.rejection_gr * (1.0 - row.rejection_gr) / denom);
          row.replications = static_cast<int>(used);
          row.failures = draws.failures;
          row.redraws = draws.redraws;
          report.power_rows.push_back(row);
        }
      }
    }
  }
  return report;
}

}  // namespace tobitls
