#include "support.hpp"

#include "tobitls/model.hpp"
#include "tobitls/special.hpp"

#include <doctest.h>

#include <cmath>

using namespace tobitls;
using tobitls::testing::fd_hessian;
using tobitls::testing::fd_score;
using tobitls::testing::max_rel_dev;

namespace {

TobitDataset six_point() {
  Eigen::VectorXd y(6);
  y << -0.5, -0.5, -0.5, 0.3, 1.2, 2.0;
  Eigen::MatrixXd X(6, 2);
  X << 1, 0.1, 1, 0.4, 1, 0.9, 1, 0.3, 1, 0.5, 1, 0.8;
  return TobitDataset::create(y, {true, true, true, false, false, false}, X, -0.5);
}

}  // namespace

TEST_CASE("dataset contract") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);
  Eigen::VectorXd y(3);
  y << 0.0, 1.0, 2.0;
  CHECK_NOTHROW(TobitDataset::create(y, {true, false, false}, X, 0.0));
  CHECK_THROWS_AS(TobitDataset::create(y, {false, false, false}, X, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(TobitDataset::create(y, {false, true, false}, X, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(TobitDataset::create(y, {true, false}, X, 0.0), std::invalid_argument);
  const auto d = TobitDataset::create(y, {true, false, false}, X, 0.0);
  CHECK(d.n_censored() == 1);
  CHECK(d.covariate_names() == std::vector<std::string>{"x0"});
  CHECK(d.without_row(0).n_censored() == 0);
}

TEST_CASE("standardize") {
  Eigen::VectorXd y(1);
  y << 1.3;
  const auto d1 = TobitDataset::create(y, {false}, Eigen::MatrixXd::Ones(1, 1), 0.0);
  const auto s1 = standardize(Theta::make(Eigen::VectorXd::Zero(1), 1.0, GeneratorFamily::normal()), d1);
  CHECK(s1.zeta[0] == doctest::Approx(1.3));
  CHECK(s1.zeta_c.size() == 0);

  Eigen::MatrixXd X(1, 2);
  X << 1.0, 0.4;
  y << -1.0;
  const auto d2 = TobitDataset::create(y, {true}, X, -1.0);
  const auto s2 = standardize(Theta::make(Eigen::Vector2d(0.2, 0.5), 2.0, GeneratorFamily::normal()), d2);
  CHECK(s2.zeta_c[0] == doctest::Approx(-0.7));

  // Joint scaling leaves zeta unchanged.
  const auto d = six_point();
  const Theta th = Theta::make(Eigen::Vector2d(0.1, 0.7), 0.9, GeneratorFamily::normal());
  const auto d3 = TobitDataset::create(3.0 * d.y(), d.censored(), d.X(), 3.0 * d.gamma());
  const auto a = standardized_all(th, d);
  const auto b = standardized_all(Theta::make(3.0 * th.beta, 3.0 * th.phi, th.family), d3);
  CHECK(max_rel_dev(a, b) < 1e-14);
  CHECK_THROWS_AS(Theta::make(th.beta, -1.0, th.family), std::invalid_argument);
}

TEST_CASE("loglik reductions") {
  const auto d = six_point();
  const auto fam = GeneratorFamily::normal();
  const Theta th = Theta::make(Eigen::Vector2d(0.1, 0.7), 0.9, fam);
  // Hand computation from the distribution primitives.
  double expect = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double mu = d.X().row(i).dot(th.beta);
    if (d.is_censored(i)) {
      expect += std::log(sym_cdf(fam, (d.gamma() - mu) / th.phi));
    } else {
      const double z = (d.y()[i] - mu) / th.phi;
      expect += log_g(fam, z * z) - std::log(th.phi);
    }
  }
  CHECK(loglik(th, d) == doctest::Approx(expect).epsilon(1e-13));

  // All censored, beta = 0, phi = 1: n log Phi(gamma).
  Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 0.3);
  const auto dc = TobitDataset::create(y, {true, true, true, true}, Eigen::MatrixXd::Ones(4, 1), 0.3);
  CHECK(loglik(Theta::make(Eigen::VectorXd::Zero(1), 1.0, fam), dc) ==
        doctest::Approx(4.0 * std::log(special::normal_cdf(0.3))).epsilon(1e-14));

  // Additivity over cases.
  const auto contrib = loglik_contributions(th, d);
  CHECK(loglik(th, d) - loglik(th, d.without_row(4)) == doctest::Approx(contrib[4]).epsilon(1e-12));

  // Location equivariance.
  const double c = 2.5;
  const auto shifted = TobitDataset::create((d.y().array() + c).matrix(), d.censored(), d.X(), d.gamma() + c);
  Eigen::VectorXd b = th.beta;
  b[0] += c;
  CHECK(loglik(Theta::make(b, th.phi, fam), shifted) == doctest::Approx(loglik(th, d)).epsilon(1e-12));

  // Censored probabilities far in the tail stay on the log scale, never NaN.
  const Theta far = Theta::make(Eigen::Vector2d(1e4, 0.0), 0.01, fam);
  const double lf = loglik(far, d);
  CHECK_FALSE(std::isnan(lf));
  CHECK(lf < -1e10);
}

TEST_CASE("censoring consistency") {
  Rng rng(3);
  const auto fam = GeneratorFamily::student_t(4.0);
  const auto d = simulate_dataset(fam, 50, Eigen::Vector2d(0.2, 0.5), 1.0, 0.0, rng);
  const Theta th = Theta::make(Eigen::Vector2d(0.2, 0.5), 1.0, fam);
  const auto low = TobitDataset::create(d.y(), d.censored(), d.X(), d.y().minCoeff() - 10.0);
  double plain = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double z = (d.y()[i] - d.X().row(i).dot(th.beta)) / th.phi;
    plain += sym_log_pdf(fam, z) - std::log(th.phi);
  }
  CHECK(loglik(th, low) == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("normal closed forms for score and hessian") {
  Rng rng(9);
  const auto fam = GeneratorFamily::normal();
  const auto d = simulate_dataset(fam, 40, Eigen::Vector3d(0.3, -0.2, 1.0), 1.2, 0.0, rng);
  const Theta th = Theta::make(Eigen::Vector3d(0.1, 0.1, 0.8), 1.4, fam);
  const Eigen::VectorXd g = score(th, d);
  const Eigen::VectorXd ls = d.X().transpose() * (d.y() - d.X() * th.beta) / (th.phi * th.phi);
  CHECK(max_rel_dev(g.head(3), ls) < 1e-12);
  const Eigen::MatrixXd H = hessian(th, d);
  const Eigen::MatrixXd xx = -d.X().transpose() * d.X() / (th.phi * th.phi);
  CHECK(max_rel_dev(H.topLeftCorner(3, 3), xx) < 1e-12);
}

TEST_CASE("analytic derivatives match finite differences") {
  Rng rng(2024);
  for (const auto& fam : tobitls::testing::model_families()) {
    for (int rep = 0; rep < 10; ++rep) {
      auto c = tobitls::testing::random_case(fam, 60, 0.3, rng);
      INFO(fam.name(), " rep ", rep);
      const Eigen::VectorXd g = score(c.theta, c.data);
      CHECK(max_rel_dev(g, fd_score(c.theta, c.data)) < 1e-6);
      const Eigen::MatrixXd H = hessian(c.theta, c.data);
      CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(max_rel_dev(H, fd_hessian(c.theta, c.data)) < 1e-5);
    }
  }
}

TEST_CASE("packing layout") {
  const Theta bs = Theta::make(Eigen::Vector2d(0.1, 0.2), 4.0, GeneratorFamily::birnbaum_saunders(1.0));
  CHECK(pack(bs).size() == 3);  // beta (2) + xi1
  // Fixed-dispersion kinds ignore the phi argument of make but reject edits.
  CHECK(Theta::make(Eigen::Vector2d(0.1, 0.2), 2.0, GeneratorFamily::birnbaum_saunders(1.0)).phi == 4.0);
  Theta edited = bs;
  edited.phi = 2.0;
  CHECK_THROWS_AS(edited.validate(), std::invalid_argument);
  const Theta t = Theta::make(Eigen::Vector2d(0.1, 0.2), 1.5, GeneratorFamily::student_t(4.0));
  CHECK(pack(t).size() == 3);  // beta (2) + phi
  const Theta back = unpack(t, pack(t));
  CHECK(back.phi == t.phi);
  CHECK(back.beta == t.beta);
}
