#include "tobitls/diagnostics.hpp"

#include "tobitls/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tobitls {

namespace {

const double kResidualCap = -std::log(std::numeric_limits<double>::epsilon());

}  // namespace

double ks_statistic_exp1(Eigen::VectorXd sample) {
  const Eigen::Index n = sample.size();
  if (n == 0) throw std::invalid_argument("ks_statistic_exp1: empty sample");
  std::sort(sample.data(), sample.data() + n);
  double d = 0.0;
  const double nn = static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = -std::expm1(-std::max(0.0, sample[i]));
    d = std::max({d, static_cast<double>(i + 1) / nn - f, f - static_cast<double>(i) / nn});
  }
  return d;
}

double kolmogorov_pvalue(double d, Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("kolmogorov_pvalue: n must be positive");
  if (!(d > 0.0)) return 1.0;
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double quantile_type7(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile_type7: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile_type7: prob outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ResidualReport gcs_residuals(const Theta& theta, const TobitDataset& data, CensoredAdjustment adjustment) {
  theta.validate();
  const Eigen::VectorXd zeta = standardized_all(theta, data);
  const Eigen::Index n = data.n();
  ResidualReport rep;
  rep.residuals.resize(n);
  rep.censored_flags = data.censored();
  rep.capped_flags.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    // 1 - F(z) = F(-z) by symmetry, evaluated on the log scale.
    double r = -sym_log_cdf(theta.family, -zeta[i]);
    if (!(r <= kResidualCap)) {
      r = kResidualCap;
      rep.capped_flags[static_cast<std::size_t>(i)] = true;
    }
    r = std::max(0.0, r);
    if (data.is_censored(i)) {
      if (adjustment == CensoredAdjustment::PlusOne) {
        r += 1.0;
      } else if (adjustment == CensoredAdjustment::ConditionalMean && r > 0.0) {
        // Mean of EXP(1) truncated to [0, r_c].
        r = std::max(0.0, 1.0 - r / std::expm1(r));
      }
    }
    rep.residuals[i] = r;
  }
  rep.ks_statistic = ks_statistic_exp1(rep.residuals);
  rep.ks_pvalue = kolmogorov_pvalue(rep.ks_statistic, n);
  return rep;
}

ResidualReport gcs_residuals(const FitResult& fit, const TobitDataset& data, CensoredAdjustment adjustment) {
  return gcs_residuals(fit.theta_hat, data, adjustment);
}

TobitDataset simulate_like(const Theta& theta, const TobitDataset& like, Rng& rng) {
  const Eigen::Index n = like.n();
  const Eigen::VectorXd mu = like.X() * theta.beta;
  const Eigen::VectorXd z = sym_sample(theta.family, rng, n);
  Eigen::VectorXd y(n);
  std::vector<bool> censored(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ystar = mu[i] + theta.phi * z[i];
    const bool c = ystar <= like.gamma();
    censored[static_cast<std::size_t>(i)] = c;
    y[i] = c ? like.gamma() : ystar;
  }
  return TobitDataset::create(std::move(y), std::move(censored), like.X(), like.gamma(), like.covariate_names());
}

EnvelopeBand qq_envelope(const FitResult& fit, const TobitDataset& data, const EnvelopeOptions& opts) {
  if (opts.replications < 1) throw std::invalid_argument("envelope replications must be >= 1");
  if (!(opts.level >= 0.0 && opts.level < 1.0)) throw std::invalid_argument("envelope level must lie in [0, 1)");
  const Eigen::Index n = data.n();
  const auto reps = static_cast<std::size_t>(opts.replications);
  const int allowed_failures = opts.replications / 10;

  std::vector<Eigen::VectorXd> sorted(reps);
  std::vector<int> failures(reps, 0);
  parallel_for(reps, resolve_threads(opts.threads), [&](std::size_t r) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng = substream(opts.seed, 0, r, attempt);
      try {
        const TobitDataset sim = simulate_like(fit.theta_hat, data, rng);
        const FitResult refit = fit_model(sim, fit.theta_hat.family, opts.optim, fit.theta_hat, fit.fixed);
        Eigen::VectorXd res = gcs_residuals(refit, sim, opts.adjustment).residuals;
        std::sort(res.data(), res.data() + res.size());
        sorted[r] = std::move(res);
        return;
      } catch (const NumericalError&) {
      } catch (const std::domain_error&) {
      } catch (const std::invalid_argument&) {
      }
      if (++failures[r] > allowed_failures) {
        throw NumericalError("envelope: replication " + std::to_string(r) + " failed to refit " +
                             std::to_string(failures[r]) + " times");
      }
    }
  });
  const int total_failures = std::accumulate(failures.begin(), failures.end(), 0);
  if (total_failures > allowed_failures) {
    std::ostringstream msg;
    msg << "envelope: " << total_failures << " refits failed across " << opts.replications
        << " replications (limit " << allowed_failures << ")";
    throw NumericalError(msg.str());
  }

  EnvelopeBand band;
  band.coverage_level = opts.level;
  band.replications = opts.replications;
  band.failures = total_failures;
  band.theoretical_quantiles.resize(n);
  band.lower.resize(n);
  band.median.resize(n);
  band.upper.resize(n);
  const double plo = 0.5 * (1.0 - opts.level), phi = 0.5 * (1.0 + opts.level);
  std::vector<double> column(reps);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pos = static_cast<double>(i + 1) / static_cast<double>(n + 1);
    band.theoretical_quantiles[i] = -std::log1p(-pos);
    for (std::size_t r = 0; r < reps; ++r) column[r] = sorted[r][i];
    std::sort(column.begin(), column.end());
    band.lower[i] = quantile_type7(column, plo);
    band.median[i] = quantile_type7(column, 0.5);
    band.upper[i] = quantile_type7(column, phi);
  }

  const ResidualReport obs = gcs_residuals(fit, data, opts.adjustment);
  band.order.resize(static_cast<std::size_t>(n));
  std::iota(band.order.begin(), band.order.end(), Eigen::Index{0});
  std::stable_sort(band.order.begin(), band.order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return obs.residuals[a] < obs.residuals[b]; });
  band.observed.resize(n);
  band.observed_censored.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = band.order[static_cast<std::size_t>(i)];
    band.observed[i] = obs.residuals[row];
    band.observed_censored[static_cast<std::size_t>(i)] = data.is_censored(row);
  }
  return band;
}

}  // namespace tobitls
