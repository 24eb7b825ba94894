#include "support.hpp"

#include "tobitls/diagnostics.hpp"
#include "tobitls/parallel.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace tobitls;

TEST_CASE("residual at the median is log 2") {
  Eigen::VectorXd y(2);
  y << 0.7, -2.0;
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(2, 1);
  const auto d = TobitDataset::create(y, {false, true}, X, -2.0);
  for (const auto& fam : tobitls::testing::model_families()) {
    const double phi = fam.fixed_dispersion().value_or(1.3);
    const auto r = gcs_residuals(Theta::make(Eigen::VectorXd::Constant(1, 0.7), phi, fam), d);
    CHECK(r.residuals[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(r.censored_flags == std::vector<bool>{false, true});
  }
}

TEST_CASE("residuals are monotone in the standardized value") {
  Rng rng(6);
  const auto fam = GeneratorFamily::student_t(4.0);
  const auto d = simulate_dataset(fam, 80, Eigen::Vector2d(0.2, 0.5), 1.0, 0.2, rng);
  const Theta th = Theta::make(Eigen::Vector2d(0.2, 0.5), 1.0, fam);
  const auto r = gcs_residuals(th, d);
  const Eigen::VectorXd z = standardized_all(th, d);
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = 0; j < d.n(); ++j) {
      if (z[i] < z[j]) CHECK(r.residuals[i] <= r.residuals[j]);
    }
  }
  CHECK((r.residuals.array() > 0).all());

  const auto plus = gcs_residuals(th, d, CensoredAdjustment::PlusOne);
  const auto cm = gcs_residuals(th, d, CensoredAdjustment::ConditionalMean);
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    if (d.is_censored(i)) {
      CHECK(plus.residuals[i] == doctest::Approx(r.residuals[i] + 1.0));
      CHECK(cm.residuals[i] < r.residuals[i]);
      CHECK(cm.residuals[i] > 0.0);
    } else {
      CHECK(cm.residuals[i] == r.residuals[i]);
    }
  }
}

TEST_CASE("extreme tails are capped and flagged") {
  Eigen::VectorXd y(2);
  y << 60.0, 0.0;
  const auto d = TobitDataset::create(y, {false, false}, Eigen::MatrixXd::Ones(2, 1), -5.0);
  const auto r = gcs_residuals(Theta::make(Eigen::VectorXd::Zero(1), 1.0, GeneratorFamily::normal()), d);
  CHECK(r.capped_flags[0]);
  CHECK_FALSE(r.capped_flags[1]);
  CHECK(std::isfinite(r.residuals[0]));
}

TEST_CASE("KS machinery") {
  CHECK(kolmogorov_pvalue(0.0, 50) == 1.0);
  CHECK(kolmogorov_pvalue(1.0, 50) < 1e-12);
  // Asymptotic 5% point 1.358 / sqrt(n) (with the Stephens correction).
  const double n = 400;
  const double d05 = 1.3581 / (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
  CHECK(kolmogorov_pvalue(d05, 400) == doctest::Approx(0.05).epsilon(1e-3));
  Eigen::VectorXd one(1);
  one << std::log(2.0);
  CHECK(ks_statistic_exp1(one) == doctest::Approx(0.5));

  const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_type7(s, 0.0) == 1.0);
  CHECK(quantile_type7(s, 1.0) == 4.0);
  CHECK(quantile_type7(s, 0.5) == 2.5);
  CHECK(quantile_type7(s, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("misspecified family is detected by KS") {
  Rng rng(314);
  const auto truth = GeneratorFamily::power_exponential(-0.5);
  const auto d = simulate_dataset(truth, 1500, Eigen::Vector2d(0.2, 0.5), 1.0, 0.0, rng);
  const FitResult wrong = fit_model(d, GeneratorFamily::student_t(2.0));
  const FitResult right = fit_model(d, truth);
  const auto rw = gcs_residuals(wrong, d);
  const auto rr = gcs_residuals(right, d);
  CHECK(rw.ks_pvalue < 0.01);
  CHECK(rr.ks_pvalue > rw.ks_pvalue);
}

TEST_CASE("envelope bands") {
  Rng rng(11);
  const auto fam = GeneratorFamily::normal();
  const auto d = simulate_dataset(fam, 60, Eigen::Vector2d(0.2, 0.5), 1.0, 0.2, rng);
  const FitResult fit = fit_model(d, fam);
  EnvelopeOptions o;
  o.replications = 40;
  o.seed = 5;
  o.threads = 1;
  const EnvelopeBand a = qq_envelope(fit, d, o);
  o.threads = 4;
  const EnvelopeBand b = qq_envelope(fit, d, o);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  CHECK(a.median == b.median);
  CHECK(a.replications == 40);
  CHECK((a.lower.array() <= a.median.array()).all());
  CHECK((a.median.array() <= a.upper.array()).all());
  CHECK(std::is_sorted(a.observed.data(), a.observed.data() + a.observed.size()));
  CHECK(a.theoretical_quantiles[0] == doctest::Approx(-std::log1p(-1.0 / 61.0)));

  o.level = 0.0;
  const EnvelopeBand z = qq_envelope(fit, d, o);
  CHECK(z.lower == z.upper);
  CHECK(z.lower == z.median);

  o.level = 1.5;
  CHECK_THROWS_AS(qq_envelope(fit, d, o), std::invalid_argument);
}

TEST_CASE("simulate_like keeps design and threshold") {
  Rng rng(2);
  const auto fam = GeneratorFamily::normal();
  const auto d = simulate_dataset(fam, 30, Eigen::Vector2d(0.2, 0.5), 1.0, 0.3, rng);
  Rng r2 = substream(1, 2, 3);
  const auto s = simulate_like(Theta::make(Eigen::Vector2d(0.2, 0.5), 1.0, fam), d, r2);
  CHECK(s.X() == d.X());
  CHECK(s.gamma() == d.gamma());
  for (Eigen::Index i = 0; i < s.n(); ++i) {
    if (s.is_censored(i)) CHECK(s.y()[i] == s.gamma());
    else CHECK(s.y()[i] > s.gamma());
  }
}
