#include "tobitls/lsdist.hpp"

#include "tobitls/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tobitls {

namespace sp = special;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t expected_extra(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Normal:
      return 0;
    case GeneratorKind::BirnbaumSaundersT:
      return 2;
    default:
      return 1;
  }
}

// log cosh(z) without overflow.
double log_cosh(double z) {
  const double a = std::fabs(z);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

double sign(double z) { return z < 0.0 ? -1.0 : 1.0; }

// Power-exponential exponent a = 2 / (1 + xi), so f(z) is proportional to exp(-|z|^a / 2).
double pe_exponent(const GeneratorFamily& f) { return 2.0 / (1.0 + f.xi(0)); }

// Lower-tail log CDF for z <= 0.
double lower_log_cdf(const GeneratorFamily& f, double z) {
  switch (f.kind()) {
    case GeneratorKind::Normal:
      return sp::log_normal_cdf(z);
    case GeneratorKind::StudentT:
      return sp::student_t_log_cdf(z, f.xi(0));
    case GeneratorKind::PowerExponential: {
      const double s = 0.5 * std::pow(-z, pe_exponent(f));
      return std::log(0.5) + sp::log_gamma_q(0.5 * (1.0 + f.xi(0)), s);
    }
    case GeneratorKind::BirnbaumSaunders: {
      const double w = 2.0 / f.xi(0) * std::sinh(z);
      return std::isinf(w) ? -kInf : sp::log_normal_cdf(w);
    }
    case GeneratorKind::BirnbaumSaundersT: {
      const double w = 2.0 / f.xi(0) * std::sinh(z);
      return std::isinf(w) ? -kInf : sp::student_t_log_cdf(w, f.xi(1));
    }
  }
  throw std::logic_error("unknown generator kind");
}

// Lower-tail quantile for p < 0.5.
double lower_quantile(const GeneratorFamily& f, double p) {
  switch (f.kind()) {
    case GeneratorKind::Normal:
      return sp::normal_quantile(p);
    case GeneratorKind::StudentT:
      return sp::student_t_quantile(p, f.xi(0));
    case GeneratorKind::PowerExponential: {
      const double log_p = std::log(p);
      const double guess = std::min(sp::normal_quantile(p), -1e-3);
      return sp::invert_cdf([&](double z) { return sym_log_cdf(f, z) - log_p; }, 0.0, guess);
    }
    case GeneratorKind::BirnbaumSaunders:
      return std::asinh(0.5 * f.xi(0) * sp::normal_quantile(p));
    case GeneratorKind::BirnbaumSaundersT:
      return std::asinh(0.5 * f.xi(0) * sp::student_t_quantile(p, f.xi(1)));
  }
  throw std::logic_error("unknown generator kind");
}

// Taylor coefficients of d/dz log f around zero for the sinh-based kinds:
// d1(z) = c1 z + c3 z^3 + O(z^5).
struct SinhTaylor {
  double c1;
  double c3;
};

SinhTaylor sinh_taylor(const GeneratorFamily& f) {
  if (f.kind() == GeneratorKind::BirnbaumSaunders) {
    const double k = 2.0 / (f.xi(0) * f.xi(0));
    return {1.0 - 2.0 * k, -1.0 / 3.0 - 4.0 * k / 3.0};
  }
  const double nu = f.xi(1);
  const double a = nu * f.xi(0) * f.xi(0);
  const double k = nu + 1.0;
  return {1.0 - 4.0 * k / a, -1.0 / 3.0 - 8.0 * k / (3.0 * a) + 16.0 * k / (a * a)};
}

template <typename T>
T bs_t_d1(T z, T nu, T xi1) {
  const T a = nu * xi1 * xi1;
  const T k = nu + 1;
  if (z == 0) return 0;
  if (std::fabs(z) <= 1) {
    const T s = std::sinh(z);
    return std::tanh(z) - 2 * k * std::sinh(2 * z) / (a + 4 * s * s);
  }
  const T s = std::sinh(z);
  const T inv_s2 = 1 / (s * s);
  const T coth = 1 / std::tanh(z);
  return std::tanh(z) - 2 * k * (2 * coth) / (a * inv_s2 + 4);
}

template <typename T>
T bs_t_d2(T z, T nu, T xi1) {
  const T a = nu * xi1 * xi1;
  const T k = nu + 1;
  const T sech = 1 / std::cosh(z);
  if (std::fabs(z) <= 1) {
    const T s = std::sinh(z);
    const T d = a + 4 * s * s;
    const T s2z = std::sinh(2 * z);
    return sech * sech - 4 * k * std::cosh(2 * z) / d + 8 * k * s2z * s2z / (d * d);
  }
  const T s = std::sinh(z);
  const T inv_s2 = 1 / (s * s);
  const T coth = 1 / std::tanh(z);
  const T denom = a * inv_s2 + 4;
  return sech * sech - 4 * k * (2 + inv_s2) / denom + 8 * k * 4 * coth * coth / (denom * denom);
}

template <typename T>
T bs_d1(T z, T xi) {
  return std::tanh(z) - 2 / (xi * xi) * std::sinh(2 * z);
}

template <typename T>
T bs_d2(T z, T xi) {
  const T sech = 1 / std::cosh(z);
  return sech * sech - 4 / (xi * xi) * std::cosh(2 * z);
}

}  // namespace

std::string_view kind_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Normal:
      return "normal";
    case GeneratorKind::StudentT:
      return "student-t";
    case GeneratorKind::PowerExponential:
      return "power-exponential";
    case GeneratorKind::BirnbaumSaunders:
      return "birnbaum-saunders";
    case GeneratorKind::BirnbaumSaundersT:
      return "birnbaum-saunders-t";
  }
  return "unknown";
}

std::vector<double> default_xi(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Normal:
      return {};
    case GeneratorKind::StudentT:
      return {4.0};
    case GeneratorKind::PowerExponential:
      return {0.5};
    case GeneratorKind::BirnbaumSaunders:
      return {1.0};
    case GeneratorKind::BirnbaumSaundersT:
      return {1.0, 4.0};
  }
  return {};
}

GeneratorFamily::GeneratorFamily(GeneratorKind kind, std::vector<double> xi)
    : kind_(kind), xi_(std::move(xi)) {
  if (xi_.size() != expected_extra(kind_)) {
    throw std::invalid_argument(std::string(kind_name(kind_)) + " expects " +
                                std::to_string(expected_extra(kind_)) + " extra parameter(s), got " +
                                std::to_string(xi_.size()));
  }
  for (std::size_t i = 0; i < xi_.size(); ++i) {
    if (!xi_admissible(i, xi_[i])) {
      throw std::invalid_argument(std::string(kind_name(kind_)) + ": extra parameter xi" +
                                  std::to_string(i + 1) + " = " + std::to_string(xi_[i]) +
                                  " is out of range");
    }
  }
  switch (kind_) {
    case GeneratorKind::Normal:
      log_norm_ = -sp::kLogSqrt2Pi;
      break;
    case GeneratorKind::StudentT: {
      const double nu = xi_[0];
      log_norm_ = sp::log_gamma(0.5 * (nu + 1.0)) - sp::log_gamma(0.5 * nu) -
                  0.5 * std::log(sp::kPi * nu);
      break;
    }
    case GeneratorKind::PowerExponential: {
      const double h = 0.5 * (1.0 + xi_[0]);
      log_norm_ = -(std::log(1.0 + xi_[0]) + h * std::log(2.0) + sp::log_gamma(h));
      break;
    }
    case GeneratorKind::BirnbaumSaunders:
      log_norm_ = std::log(2.0 / xi_[0]) - sp::kLogSqrt2Pi;
      break;
    case GeneratorKind::BirnbaumSaundersT: {
      const double xi1 = xi_[0];
      const double nu = xi_[1];
      const double log_t = sp::log_gamma(0.5 * (nu + 1.0)) - sp::log_gamma(0.5 * nu) -
                           0.5 * std::log(sp::kPi * nu);
      log_norm_ = log_t + std::log(2.0 / xi1) + 0.5 * (nu + 1.0) * std::log(xi1 * xi1 * nu);
      break;
    }
  }
}

bool GeneratorFamily::xi_admissible(std::size_t i, double value) const {
  if (!std::isfinite(value) || i >= expected_extra(kind_)) return false;
  if (kind_ == GeneratorKind::PowerExponential) return value > -1.0 && value <= 1.0;
  return value > 0.0;
}

GeneratorFamily GeneratorFamily::parse(std::string_view name, std::vector<double> xi) {
  for (auto kind : {GeneratorKind::Normal, GeneratorKind::StudentT, GeneratorKind::PowerExponential,
                    GeneratorKind::BirnbaumSaunders, GeneratorKind::BirnbaumSaundersT}) {
    if (name == kind_name(kind)) {
      auto defaults = default_xi(kind);
      if (xi.size() > defaults.size()) {
        throw std::invalid_argument(std::string(name) + " takes at most " +
                                    std::to_string(defaults.size()) + " extra parameter(s)");
      }
      for (std::size_t i = 0; i < xi.size(); ++i) defaults[i] = xi[i];
      return {kind, std::move(defaults)};
    }
  }
  throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

std::string GeneratorFamily::name() const { return std::string(kind_name(kind_)); }

GeneratorFamily GeneratorFamily::with_xi(std::size_t i, double value) const {
  auto xi = xi_;
  xi.at(i) = value;
  return {kind_, std::move(xi)};
}

std::optional<double> GeneratorFamily::fixed_dispersion() const {
  if (kind_ == GeneratorKind::BirnbaumSaunders || kind_ == GeneratorKind::BirnbaumSaundersT) {
    return kBirnbaumSaundersDispersion;
  }
  return std::nullopt;
}

LogSymmetricParams::LogSymmetricParams(double eta_, double phi_, GeneratorFamily family_)
    : eta(eta_), phi(phi_), family(std::move(family_)) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
  if (!(phi > 0.0) || !std::isfinite(phi)) throw std::invalid_argument("phi must be positive");
}

double normalizing_constant(const GeneratorFamily& family) {
  return std::exp(family.log_normalizer());
}

double sym_log_pdf(const GeneratorFamily& f, double z) {
  switch (f.kind()) {
    case GeneratorKind::Normal:
      return f.log_normalizer() - 0.5 * z * z;
    case GeneratorKind::StudentT:
      return f.log_normalizer() - 0.5 * (f.xi(0) + 1.0) * std::log1p(z * z / f.xi(0));
    case GeneratorKind::PowerExponential:
      return f.log_normalizer() - 0.5 * std::pow(std::fabs(z), pe_exponent(f));
    case GeneratorKind::BirnbaumSaunders: {
      const double s = std::sinh(z);
      return f.log_normalizer() + log_cosh(z) - 2.0 / (f.xi(0) * f.xi(0)) * s * s;
    }
    case GeneratorKind::BirnbaumSaundersT: {
      // Written through w = (2 / xi1) sinh z to stay finite for large |z|.
      const double nu = f.xi(1);
      const double w = 2.0 / f.xi(0) * std::sinh(z);
      const double log_t = sp::log_gamma(0.5 * (nu + 1.0)) - sp::log_gamma(0.5 * nu) -
                           0.5 * std::log(sp::kPi * nu);
      const double tail = std::isinf(w) ? (nu + 1.0) * (std::fabs(z) + std::log(1.0 / f.xi(0)) -
                                                        0.5 * std::log(nu))
                                        : 0.5 * (nu + 1.0) * std::log1p(w * w / nu);
      return log_t + std::log(2.0 / f.xi(0)) + log_cosh(z) - tail;
    }
  }
  throw std::logic_error("unknown generator kind");
}

double sym_pdf(const GeneratorFamily& family, double z) { return std::exp(sym_log_pdf(family, z)); }

double log_g(const GeneratorFamily& family, double u) {
  if (!(u >= 0.0)) throw std::domain_error("log_g: u must be non-negative");
  return sym_log_pdf(family, std::sqrt(u));
}

double sym_log_cdf(const GeneratorFamily& family, double z) {
  if (std::isnan(z)) throw std::domain_error("sym_log_cdf: NaN argument");
  if (z <= 0.0) return lower_log_cdf(family, z);
  return std::log1p(-std::exp(lower_log_cdf(family, -z)));
}

double sym_cdf(const GeneratorFamily& family, double z) {
  if (std::isnan(z)) throw std::domain_error("sym_cdf: NaN argument");
  if (z <= 0.0) return std::exp(lower_log_cdf(family, z));
  return 1.0 - std::exp(lower_log_cdf(family, -z));
}

double sym_quantile(const GeneratorFamily& family, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("sym_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return lower_quantile(family, p);
  return -lower_quantile(family, 1.0 - p);
}

double sym_dlog_pdf(const GeneratorFamily& f, double z) {
  switch (f.kind()) {
    case GeneratorKind::Normal:
      return -z;
    case GeneratorKind::StudentT:
      return -(f.xi(0) + 1.0) * z / (f.xi(0) + z * z);
    case GeneratorKind::PowerExponential: {
      const double a = pe_exponent(f);
      if (z == 0.0) {
        if (a > 1.0) return 0.0;
        throw std::domain_error("power-exponential log-density is not differentiable at 0");
      }
      return -0.5 * a * sign(z) * std::pow(std::fabs(z), a - 1.0);
    }
    case GeneratorKind::BirnbaumSaunders:
      return bs_d1(z, f.xi(0));
    case GeneratorKind::BirnbaumSaundersT:
      return bs_t_d1(z, f.xi(1), f.xi(0));
  }
  throw std::logic_error("unknown generator kind");
}

double sym_d2log_pdf(const GeneratorFamily& f, double z) {
  switch (f.kind()) {
    case GeneratorKind::Normal:
      return -1.0;
    case GeneratorKind::StudentT: {
      const double nu = f.xi(0);
      const double d = nu + z * z;
      return -(nu + 1.0) * (nu - z * z) / (d * d);
    }
    case GeneratorKind::PowerExponential: {
      const double a = pe_exponent(f);
      if (a == 2.0) return -1.0;
      if (z == 0.0) {
        if (a > 2.0) return 0.0;
        throw std::domain_error("power-exponential log-density has a cusp at 0");
      }
      return -0.5 * a * (a - 1.0) * std::pow(std::fabs(z), a - 2.0);
    }
    case GeneratorKind::BirnbaumSaunders:
      return bs_d2(z, f.xi(0));
    case GeneratorKind::BirnbaumSaundersT:
      return bs_t_d2(z, f.xi(1), f.xi(0));
  }
  throw std::logic_error("unknown generator kind");
}

double v_weight(const GeneratorFamily& f, double u) {
  if (!(u >= 0.0)) throw std::domain_error("v_weight: u must be non-negative");
  switch (f.kind()) {
    case GeneratorKind::Normal:
      return -0.5;
    case GeneratorKind::StudentT:
      return -0.5 * (f.xi(0) + 1.0) / (f.xi(0) + u);
    case GeneratorKind::PowerExponential: {
      const double xi = f.xi(0);
      const double e = 1.0 / (1.0 + xi);
      if (u == 0.0) {
        if (xi == 0.0) return -0.5;
        if (xi < 0.0) return 0.0;
        throw std::domain_error("v_weight: power-exponential kernel has a cusp at u = 0");
      }
      return -0.5 * e * std::pow(u, e - 1.0);
    }
    case GeneratorKind::BirnbaumSaunders:
    case GeneratorKind::BirnbaumSaundersT: {
      if (u < 1e-10) {
        const auto c = sinh_taylor(f);
        return 0.5 * (c.c1 + c.c3 * u);
      }
      const double z = std::sqrt(u);
      return sym_dlog_pdf(f, z) / (2.0 * z);
    }
  }
  throw std::logic_error("unknown generator kind");
}

double v_weight_prime(const GeneratorFamily& f, double u) {
  if (!(u >= 0.0)) throw std::domain_error("v_weight_prime: u must be non-negative");
  switch (f.kind()) {
    case GeneratorKind::Normal:
      return 0.0;
    case GeneratorKind::StudentT: {
      const double d = f.xi(0) + u;
      return 0.5 * (f.xi(0) + 1.0) / (d * d);
    }
    case GeneratorKind::PowerExponential: {
      const double xi = f.xi(0);
      const double e = 1.0 / (1.0 + xi);
      const double coef = -0.5 * e * (e - 1.0);
      if (u == 0.0) {
        if (xi == 0.0 || e > 2.0) return 0.0;
        if (e == 2.0) return coef;
        throw std::domain_error("v_weight_prime: power-exponential kernel has a cusp at u = 0");
      }
      return coef * std::pow(u, e - 2.0);
    }
    case GeneratorKind::BirnbaumSaunders:
    case GeneratorKind::BirnbaumSaundersT: {
      if (u < 1e-7) return 0.5 * sinh_taylor(f).c3;
      // v' = (d2 - d1 / z) / (4 u); the difference cancels near zero, so it
      // is formed in extended precision.
      using LD = long double;
      const LD z = std::sqrt(static_cast<LD>(u));
      LD d1, d2;
      if (f.kind() == GeneratorKind::BirnbaumSaunders) {
        d1 = bs_d1<LD>(z, f.xi(0));
        d2 = bs_d2<LD>(z, f.xi(0));
      } else {
        d1 = bs_t_d1<LD>(z, f.xi(1), f.xi(0));
        d2 = bs_t_d2<LD>(z, f.xi(1), f.xi(0));
      }
      return static_cast<double>((d2 - d1 / z) / (4 * z * z));
    }
  }
  throw std::logic_error("unknown generator kind");
}

double normalization_defect(const GeneratorFamily& family) {
  const double total =
      sp::integrate_real_line([&](double z) { return sym_pdf(family, z); }, 1e-14);
  return std::fabs(total - 1.0);
}

double ls_pdf(const LogSymmetricParams& params, double t) {
  if (!(t > 0.0)) throw std::domain_error("ls_pdf: t must be positive");
  const double z = (std::log(t) - std::log(params.eta)) / params.phi;
  return std::exp(sym_log_pdf(params.family, z)) / (params.phi * t);
}

double ls_cdf(const LogSymmetricParams& params, double t) {
  if (!(t > 0.0)) throw std::domain_error("ls_cdf: t must be positive");
  return sym_cdf(params.family, (std::log(t) - std::log(params.eta)) / params.phi);
}

double ls_quantile(const LogSymmetricParams& params, double p) {
  return params.eta * std::exp(params.phi * sym_quantile(params.family, p));
}

namespace {

// Draws n standard symmetric variates; one set of distribution objects per
// call so cached state in std::normal_distribution is used coherently.
template <typename Sink>
void draw_into(const GeneratorFamily& f, Rng& rng, Eigen::Index n, Sink&& sink) {
  switch (f.kind()) {
    case GeneratorKind::Normal: {
      std::normal_distribution<double> nd(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) sink(i, nd(rng));
      return;
    }
    case GeneratorKind::StudentT: {
      std::student_t_distribution<double> td(f.xi(0));
      for (Eigen::Index i = 0; i < n; ++i) sink(i, td(rng));
      return;
    }
    case GeneratorKind::PowerExponential: {
      // |z|^a / 2 ~ Gamma((1 + xi) / 2, 1) with a random sign.
      const double shape = 0.5 * (1.0 + f.xi(0));
      std::gamma_distribution<double> gd(shape, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double s = gd(rng);
        const double mag = std::pow(2.0 * s, shape);
        sink(i, (rng() >> 63) ? -mag : mag);
      }
      return;
    }
    case GeneratorKind::BirnbaumSaunders: {
      std::normal_distribution<double> nd(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) sink(i, std::asinh(0.5 * f.xi(0) * nd(rng)));
      return;
    }
    case GeneratorKind::BirnbaumSaundersT: {
      std::student_t_distribution<double> td(f.xi(1));
      for (Eigen::Index i = 0; i < n; ++i) sink(i, std::asinh(0.5 * f.xi(0) * td(rng)));
      return;
    }
  }
}

}  // namespace

double sym_draw(const GeneratorFamily& family, Rng& rng) {
  double out = 0.0;
  draw_into(family, rng, 1, [&](Eigen::Index, double z) { out = z; });
  return out;
}

Eigen::VectorXd sym_sample(const GeneratorFamily& family, Rng& rng, Eigen::Index n) {
  if (n < 0) throw std::invalid_argument("sym_sample: n must be non-negative");
  Eigen::VectorXd out(n);
  draw_into(family, rng, n, [&](Eigen::Index i, double z) { out[i] = z; });
  return out;
}

Eigen::VectorXd ls_sample(const LogSymmetricParams& params, Rng& rng, Eigen::Index n) {
  Eigen::VectorXd z = sym_sample(params.family, rng, n);
  return (params.phi * z.array()).exp() * params.eta;
}

}  // namespace tobitls
