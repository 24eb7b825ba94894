#include "tobitls/lsdist.hpp"
#include "tobitls/special.hpp"

#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using namespace tobitls;

namespace {

std::vector<GeneratorFamily> all_families() {
  return {GeneratorFamily::normal(),
          GeneratorFamily::student_t(1.0),
          GeneratorFamily::student_t(4.0),
          GeneratorFamily::power_exponential(-0.5),
          GeneratorFamily::power_exponential(0.0),
          GeneratorFamily::power_exponential(0.5),
          GeneratorFamily::power_exponential(1.0),
          GeneratorFamily::birnbaum_saunders(0.5),
          GeneratorFamily::birnbaum_saunders(1.5),
          GeneratorFamily::birnbaum_saunders_t(1.0, 4.0),
          GeneratorFamily::birnbaum_saunders_t(0.7, 2.0)};
}

// Boost quadrature of the density over the real line (split at 0 for cusps).
double boost_mass(const GeneratorFamily& fam) {
  auto f = [&](double z) { return sym_pdf(fam, z); };
  const double inf = std::numeric_limits<double>::infinity();
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  return GK::integrate(f, -inf, 0.0, 20, 1e-14) + GK::integrate(f, 0.0, inf, 20, 1e-14);
}

double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("family validation and parsing") {
  CHECK_THROWS_AS(GeneratorFamily::student_t(0.0), std::invalid_argument);
  CHECK_THROWS_AS(GeneratorFamily::power_exponential(-1.0), std::invalid_argument);
  CHECK_NOTHROW(GeneratorFamily::power_exponential(1.0));
  CHECK_THROWS_AS(GeneratorFamily::power_exponential(1.01), std::invalid_argument);
  CHECK_THROWS_AS(GeneratorFamily::birnbaum_saunders(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(GeneratorFamily::birnbaum_saunders_t(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GeneratorFamily(GeneratorKind::Normal, {1.0}), std::invalid_argument);
  CHECK(GeneratorFamily::parse("student-t") == GeneratorFamily::student_t(4.0));
  CHECK(GeneratorFamily::parse("birnbaum-saunders-t", {2.0}) == GeneratorFamily::birnbaum_saunders_t(2.0, 4.0));
  CHECK_THROWS_AS(GeneratorFamily::parse("log-cauchy"), std::invalid_argument);
  CHECK(GeneratorFamily::birnbaum_saunders(1.0).fixed_dispersion() == 4.0);
  CHECK_FALSE(GeneratorFamily::normal().fixed_dispersion().has_value());
  for (const auto& f : all_families()) CHECK(GeneratorFamily::parse(f.name(), {f.xi().begin(), f.xi().end()}) == f);
}

TEST_CASE("normalizing constants") {
  CHECK(normalizing_constant(GeneratorFamily::normal()) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(normalizing_constant(GeneratorFamily::student_t(1.0)) == doctest::Approx(1.0 / special::kPi).epsilon(1e-14));
  const double nu = 4.0;
  CHECK(normalizing_constant(GeneratorFamily::student_t(nu)) ==
        doctest::Approx(boost::math::tgamma((nu + 1) / 2) / (std::sqrt(special::kPi * nu) * boost::math::tgamma(nu / 2)))
            .epsilon(1e-13));
  CHECK(normalizing_constant(GeneratorFamily::power_exponential(0.0)) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(log_g(GeneratorFamily::normal(), 0.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
  const auto pe1 = GeneratorFamily::power_exponential(1.0);
  CHECK(log_g(pe1, 4.0) == doctest::Approx(std::log(normalizing_constant(pe1)) - 1.0).epsilon(1e-14));
  // Student-t with many degrees of freedom approaches the normal generator.
  CHECK(log_g(GeneratorFamily::student_t(1e7), 2.3) == doctest::Approx(log_g(GeneratorFamily::normal(), 2.3)).epsilon(1e-6));
}

TEST_CASE("every family integrates to one") {
  for (const auto& f : all_families()) {
    INFO(f.name(), " xi0=", f.extra_count() ? f.xi(0) : 0.0);
    CHECK(std::abs(boost_mass(f) - 1.0) <= 1e-8);
    CHECK(std::abs(normalization_defect(f)) <= 1e-8);
  }
}

TEST_CASE("Birnbaum-Saunders closed forms agree with quadrature of the kernel") {
  for (const auto& f : {GeneratorFamily::birnbaum_saunders(0.5), GeneratorFamily::birnbaum_saunders(2.0),
                        GeneratorFamily::birnbaum_saunders_t(1.0, 4.0)}) {
    for (double z : {-2.0, -0.4, 0.3, 1.7}) {
      const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double s) { return sym_pdf(f, s); }, -std::numeric_limits<double>::infinity(), z, 20, 1e-14);
      CHECK(sym_cdf(f, z) == doctest::Approx(q).epsilon(1e-10));
    }
  }
}

TEST_CASE("symmetry, cdf/pdf consistency and quantile round trips") {
  for (const auto& f : all_families()) {
    INFO(f.name());
    CHECK(sym_cdf(f, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    for (double z : {0.1, 0.5, 1.3, 2.7, 6.0}) {
      CHECK(sym_pdf(f, z) == sym_pdf(f, -z));
      CHECK(std::abs(sym_cdf(f, z) + sym_cdf(f, -z) - 1.0) <= 1e-12);
      const double h = 1e-5;
      const double fd = (sym_cdf(f, z + h) - sym_cdf(f, z - h)) / (2 * h);
      CHECK(std::abs(fd - sym_pdf(f, z)) <= 1e-6);
    }
    for (double p : {1e-9, 0.01, 0.2, 0.5, 0.8, 0.99, 1 - 1e-9}) {
      CHECK(sym_cdf(f, sym_quantile(f, p)) == doctest::Approx(p).epsilon(1e-10));
    }
  }
  CHECK(sym_quantile(GeneratorFamily::normal(), 0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(sym_cdf(GeneratorFamily::student_t(4.0), 2.776445) == doctest::Approx(0.975).epsilon(1e-6));
  CHECK_THROWS_AS(sym_quantile(GeneratorFamily::normal(), 1.0), std::domain_error);
}

TEST_CASE("weights match finite differences of log g") {
  const auto t4 = GeneratorFamily::student_t(4.0);
  CHECK(v_weight(t4, 1.0) == doctest::Approx(-0.5));
  CHECK(v_weight(GeneratorFamily::power_exponential(0.5), 1.0) == doctest::Approx(-1.0 / 3.0));
  for (double u : {0.0, 0.5, 3.0}) {
    CHECK(v_weight(GeneratorFamily::normal(), u) == -0.5);
    CHECK(v_weight_prime(GeneratorFamily::normal(), u) == 0.0);
  }
  CHECK_THROWS_AS(v_weight(GeneratorFamily::power_exponential(0.5), 0.0), std::domain_error);

  for (const auto& f : all_families()) {
    INFO(f.name());
    for (double u : {1e-3, 0.04, 0.7, 2.0, 9.0, 30.0}) {
      const double h = 1e-6 * std::max(1.0, u);
      const double dv = (log_g(f, u + h) - log_g(f, u - h)) / (2 * h);
      CHECK(v_weight(f, u) == doctest::Approx(dv).epsilon(1e-6));
      const double dvp = (v_weight(f, u + h) - v_weight(f, u - h)) / (2 * h);
      CHECK(v_weight_prime(f, u) == doctest::Approx(dvp).epsilon(1e-5).scale(1e-6));
    }
  }
}

TEST_CASE("log-symmetric properties") {
  const LogSymmetricParams ln(2.0, 1.0, GeneratorFamily::normal());
  CHECK(ls_cdf(ln, 2.0) == 0.5);
  CHECK(ls_quantile(LogSymmetricParams(1.0, 1.0, GeneratorFamily::normal()), 0.975) ==
        doctest::Approx(std::exp(1.959964)).epsilon(1e-6));
  CHECK_THROWS_AS(ls_cdf(ln, 0.0), std::domain_error);
  CHECK_THROWS_AS(LogSymmetricParams(-1.0, 1.0, GeneratorFamily::normal()), std::invalid_argument);

  for (const auto& f : all_families()) {
    INFO(f.name());
    const double phi = f.fixed_dispersion().value_or(0.8);
    const LogSymmetricParams p(1.7, phi, f);
    CHECK(ls_cdf(p, 1.7) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ls_quantile(p, 0.5) == doctest::Approx(1.7).epsilon(1e-12));
    // Mass over (0, inf), integrated on the log scale t = exp(u) for
    // |u| <= 700; the mass beyond comes from the standardized CDF.
    const auto in_log = [&](double u) { return ls_pdf(p, std::exp(u)) * std::exp(u); };
    const double lo = (-700.0 - std::log(1.7)) / phi, hi = (700.0 - std::log(1.7)) / phi;
    const double mass =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(in_log, -700.0, std::log(1.7), 25, 1e-14) +
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(in_log, std::log(1.7), 700.0, 25, 1e-14) +
        sym_cdf(f, lo) + sym_cdf(f, -hi);
    CHECK(std::abs(mass - 1.0) <= 1e-8);
    // P1: cT ~ LS(c eta, phi, g).
    const LogSymmetricParams pc(1.7 * 3.0, phi, f);
    for (double t : {0.2, 1.0, 4.0}) CHECK(std::abs(ls_cdf(pc, 3.0 * t) - ls_cdf(p, t)) <= 1e-12);
    // P2: T^c ~ LS(eta^c, c phi, g) for c > 0 (stated via quantiles).
    if (!f.fixed_dispersion()) {
      const double c = 1.6;
      const LogSymmetricParams pp(std::pow(1.7, c), c * phi, f);
      for (double q : {0.05, 0.4, 0.9}) {
        CHECK(ls_quantile(pp, q) == doctest::Approx(std::pow(ls_quantile(p, q), c)).epsilon(1e-10));
      }
    }
    // Round trip over six decades.
    for (double t = 1e-3; t <= 1e3; t *= 3.7) {
      const double u = ls_cdf(p, t);
      // Inversion is ill-conditioned where u rounds near 0 or 1.
      if (u > 1e-9 && u < 1 - 1e-9) CHECK(ls_quantile(p, u) == doctest::Approx(t).epsilon(1e-8));
    }
  }
}

TEST_CASE("samplers") {
  Rng rng(7);
  const Eigen::VectorXd z = sym_sample(GeneratorFamily::normal(), rng, 1000000);
  CHECK(std::abs(z.mean()) < 0.005);

  Rng rng2(11);
  const Eigen::VectorXd t = ls_sample(LogSymmetricParams(3.0, 0.7, GeneratorFamily::student_t(4.0)), rng2, 100000);
  std::vector<double> v(t.data(), t.data() + t.size());
  std::nth_element(v.begin(), v.begin() + 50000, v.end());
  CHECK(std::abs(v[50000] - 3.0) < 0.05);

  for (const auto& f : all_families()) {
    INFO(f.name());
    Rng r(123);
    const Eigen::VectorXd s = sym_sample(f, r, 10000);
    CHECK(ks_distance({s.data(), s.data() + s.size()}, [&](double x) { return sym_cdf(f, x); }) < 0.02);
  }

  Rng a(5), b(5);
  CHECK(sym_sample(GeneratorFamily::power_exponential(0.5), a, 50) ==
        sym_sample(GeneratorFamily::power_exponential(0.5), b, 50));
}
