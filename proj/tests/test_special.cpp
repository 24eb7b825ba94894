#include "tobitls/special.hpp"

#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

using namespace tobitls::special;

TEST_CASE("log_gamma against the standard library") {
  for (double x : {1e-8, 0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 55.5, 170.0, 1e4}) {
    CHECK(log_gamma(x) == doctest::Approx(std::lgamma(x)).epsilon(1e-13));
  }
}

TEST_CASE("incomplete gamma and beta against Boost") {
  for (double a : {0.5, 1.0, 2.5, 10.0, 60.0}) {
    for (double x : {1e-4, 0.3, 1.0, 4.0, 20.0, 90.0}) {
      CHECK(gamma_p(a, x) == doctest::Approx(boost::math::gamma_p(a, x)).epsilon(1e-12));
      CHECK(gamma_q(a, x) == doctest::Approx(boost::math::gamma_q(a, x)).epsilon(1e-12));
    }
  }
  for (double a : {0.5, 2.0, 7.5}) {
    for (double b : {0.5, 1.0, 30.0}) {
      for (double x : {1e-3, 0.2, 0.5, 0.9, 0.999}) {
        CHECK(beta_inc(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("normal functions") {
  const boost::math::normal_distribution<double> nd;
  for (double z : {-8.0, -3.0, -1.0, 0.0, 0.7, 2.5, 6.0}) {
    CHECK(normal_cdf(z) == doctest::Approx(boost::math::cdf(nd, z)).epsilon(1e-13));
    CHECK(log_normal_cdf(z) == doctest::Approx(std::log(boost::math::cdf(nd, z))).epsilon(1e-12));
  }
  // Deep lower tail stays finite and follows the asymptotic -z^2/2 - log(-z sqrt(2 pi)).
  const double z = -60.0;
  CHECK(log_normal_cdf(z) == doctest::Approx(-0.5 * z * z - std::log(-z) - kLogSqrt2Pi).epsilon(1e-6));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  for (double p : {1e-300, 1e-10, 0.01, 0.3, 0.5, 0.8, 0.999999}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("Student-t functions against Boost") {
  for (double nu : {1.0, 2.5, 4.0, 30.0}) {
    const boost::math::students_t_distribution<double> td(nu);
    for (double t : {-50.0, -2.0, -0.3, 0.0, 1.1, 7.0}) {
      CHECK(student_t_cdf(t, nu) == doctest::Approx(boost::math::cdf(td, t)).epsilon(1e-12));
      CHECK(student_t_log_pdf(t, nu) == doctest::Approx(std::log(boost::math::pdf(td, t))).epsilon(1e-12));
    }
    for (double p : {1e-12, 0.025, 0.5, 0.9}) {
      CHECK(student_t_quantile(p, nu) == doctest::Approx(boost::math::quantile(td, p)).epsilon(1e-9));
    }
  }
  CHECK(student_t_cdf(2.776445, 4.0) == doctest::Approx(0.975).epsilon(1e-6));
}

TEST_CASE("chi-square upper tail") {
  CHECK(chi2_upper_tail(0.0, 1) == 1.0);
  CHECK(chi2_upper_tail(0.0, 5) == 1.0);
  CHECK(chi2_upper_tail(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-6));
  for (double x : {0.1, 1.0, 7.3, 40.0}) {
    CHECK(chi2_upper_tail(x, 2) == doctest::Approx(std::exp(-x / 2)).epsilon(1e-14));
  }
  // Quadrature oracle for the one degree of freedom tail.
  const double x = 3.841459;
  const double tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double t) { return std::exp(-t / 2) / std::sqrt(2 * kPi * t); }, x, std::numeric_limits<double>::infinity(),
      15, 1e-14);
  CHECK(chi2_upper_tail(x, 1) == doctest::Approx(tail).epsilon(1e-10));

  double prev = 1.0;
  for (double xx = 0.05; xx < 60.0; xx += 0.37) {
    const double q = chi2_upper_tail(xx, 3);
    CHECK(q < prev);
    prev = q;
  }
  for (int r : {1, 2, 4}) {
    const boost::math::chi_squared_distribution<double> cd(r);
    for (double a : {0.01, 0.05, 0.1}) {
      CHECK(chi2_upper_quantile(a, r) == doctest::Approx(boost::math::quantile(boost::math::complement(cd, a))).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(chi2_upper_tail(-1.0, 1), std::domain_error);
  CHECK_THROWS_AS(chi2_upper_tail(1.0, 0), std::domain_error);
}

TEST_CASE("root finding and quadrature") {
  CHECK(find_root([](double x) { return x * x - 2; }, 0.0, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(invert_cdf([](double x) { return normal_cdf(x); }, 0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, kPi) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(integrate_real_line([](double x) { return std::exp(-x * x); }) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));
}
