#include "tobitls/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace tobitls::special {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 10000;

struct GammaParts {
  double log_prefix;  // a log x - x - log Gamma(a)
  double value;       // series sum or continued fraction
  bool series;        // true: value belongs to P, false: to Q
};

GammaParts gamma_parts(double a, double x) {
  if (a <= 0.0) throw std::domain_error("incomplete gamma: shape must be positive");
  if (x < 0.0) throw std::domain_error("incomplete gamma: argument must be non-negative");
  const double log_prefix = a * std::log(x) - x - log_gamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < kMaxTerms; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return {log_prefix, sum, true};
  }
  // Modified Lentz evaluation of the continued fraction for Q.
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return {log_prefix, h, false};
}

double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxTerms; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// log I_x(a,b) given both x and y = 1 - x so callers can avoid cancellation.
double log_beta_inc_xy(double a, double b, double x, double y) {
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("incomplete beta: shapes must be positive");
  if (x < 0.0 || y < 0.0) throw std::domain_error("incomplete beta: argument outside [0, 1]");
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (y == 0.0) return 0.0;
  const double log_bt = a * std::log(x) + b * std::log(y) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return log_bt + std::log(beta_cf(a, b, x)) - std::log(a);
  }
  const double upper = std::exp(log_bt) * beta_cf(b, a, y) / b;
  return std::log1p(-upper);
}

double beta_inc_xy(double a, double b, double x, double y) {
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("incomplete beta: shapes must be positive");
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double bt = std::exp(a * std::log(x) + b * std::log(y) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
  return 1.0 - bt * beta_cf(b, a, y) / b;
}

// Mills ratio (1 - Phi(x)) / phi(x) for x > 0 by continued fraction.
double mills_ratio(double x) {
  // R(x) = 1 / (x + 1 / (x + 2 / (x + 3 / (x + ...)))), evaluated by Lentz.
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = x + k * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = x + k / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = c * d;
    f *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return 1.0 / f;
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  static constexpr std::array<double, 9> kCoef = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
  }
  const double xm = x - 1.0;
  double a = kCoef[0];
  const double t = xm + 7.5;
  for (int i = 1; i < 9; ++i) a += kCoef[i] / (xm + i);
  return 0.5 * std::log(2.0 * kPi) + (xm + 0.5) * std::log(t) - t + std::log(a);
}

double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

double gamma_p(double a, double x) {
  if (x == 0.0) return 0.0;
  const auto g = gamma_parts(a, x);
  const double scaled = std::exp(g.log_prefix) * g.value;
  return g.series ? scaled : 1.0 - scaled;
}

double gamma_q(double a, double x) {
  if (x == 0.0) return 1.0;
  const auto g = gamma_parts(a, x);
  const double scaled = std::exp(g.log_prefix) * g.value;
  return g.series ? 1.0 - scaled : scaled;
}

double log_gamma_q(double a, double x) {
  if (x == 0.0) return 0.0;
  const auto g = gamma_parts(a, x);
  if (g.series) return std::log1p(-std::exp(g.log_prefix) * g.value);
  return g.log_prefix + std::log(g.value);
}

double log_gamma_p(double a, double x) {
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  const auto g = gamma_parts(a, x);
  if (g.series) return g.log_prefix + std::log(g.value);
  return std::log1p(-std::exp(g.log_prefix) * g.value);
}

double beta_inc(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("beta_inc: argument outside [0, 1]");
  return beta_inc_xy(a, b, x, 1.0 - x);
}

double log_beta_inc(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("log_beta_inc: argument outside [0, 1]");
  return log_beta_inc_xy(a, b, x, 1.0 - x);
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double log_normal_cdf(double z) {
  if (z < -20.0) {
    return -0.5 * z * z - kLogSqrt2Pi + std::log(mills_ratio(-z));
  }
  if (z > 5.0) return std::log1p(-0.5 * std::erfc(z / kSqrt2));
  return std::log(0.5 * std::erfc(-z / kSqrt2));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  // Acklam's rational approximation followed by Halley refinement.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    // Work on the smaller tail so the residual keeps relative precision.
    const double e = x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
    const double u = e / normal_pdf(x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double student_t_log_pdf(double t, double nu) {
  if (!(nu > 0.0)) throw std::domain_error("student_t: degrees of freedom must be positive");
  return log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) - 0.5 * std::log(nu * kPi) -
         0.5 * (nu + 1.0) * std::log1p(t * t / nu);
}

double student_t_log_cdf(double t, double nu) {
  if (!(nu > 0.0)) throw std::domain_error("student_t: degrees of freedom must be positive");
  if (std::isinf(t)) return t < 0 ? -std::numeric_limits<double>::infinity() : 0.0;
  const double t2 = t * t;
  const double x = nu / (nu + t2);
  const double y = t2 / (nu + t2);
  const double log_half_tail = std::log(0.5) + log_beta_inc_xy(0.5 * nu, 0.5, x, y);
  if (t <= 0.0) return log_half_tail;
  return std::log1p(-std::exp(log_half_tail));
}

double student_t_cdf(double t, double nu) {
  if (!(nu > 0.0)) throw std::domain_error("student_t: degrees of freedom must be positive");
  if (std::isinf(t)) return t < 0 ? 0.0 : 1.0;
  const double t2 = t * t;
  const double half_tail = 0.5 * beta_inc_xy(0.5 * nu, 0.5, nu / (nu + t2), t2 / (nu + t2));
  return t <= 0.0 ? half_tail : 1.0 - half_tail;
}

double student_t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("student_t_quantile: p must lie in (0, 1)");
  if (!(nu > 0.0)) throw std::domain_error("student_t: degrees of freedom must be positive");
  if (p == 0.5) return 0.0;
  // Solve on the lower tail and reflect, keeping precision for p near 1.
  const double tail = p < 0.5 ? p : 1.0 - p;
  const double log_tail = std::log(tail);
  const double guess = normal_quantile(tail);
  const double q = invert_cdf(
      [nu, log_tail](double t) {
        // Monotone in t; compare on log scale to resolve deep tails.
        return student_t_log_cdf(t, nu) - log_tail;
      },
      0.0, std::min(guess, -1e-3));
  return p < 0.5 ? q : -q;
}

double chi2_upper_tail(double x, int r) {
  if (r < 1) throw std::domain_error("chi2_upper_tail: degrees of freedom must be >= 1");
  if (!(x >= 0.0)) throw std::domain_error("chi2_upper_tail: statistic must be non-negative");
  if (std::isinf(x)) return 0.0;
  return gamma_q(0.5 * r, 0.5 * x);
}

double chi2_upper_quantile(double alpha, int r) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("chi2_upper_quantile: alpha must lie in (0, 1)");
  if (r < 1) throw std::domain_error("chi2_upper_quantile: degrees of freedom must be >= 1");
  const double log_alpha = std::log(alpha);
  auto f = [r, log_alpha](double x) { return log_alpha - log_gamma_q(0.5 * r, 0.5 * x); };
  double hi = std::max(1.0, 2.0 * r);
  while (f(hi) < 0.0) hi *= 2.0;
  return find_root(f, 0.0, hi, 1e-13);
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                 int max_iter) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw std::domain_error("find_root: interval does not bracket a root");
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * kEps * std::fabs(b) + 0.5 * abs_tol;
    const double m = 0.5 * (c - b);
    if (std::fabs(m) <= tol || fb == 0.0) return b;
    if (std::fabs(e) >= tol && std::fabs(fa) > std::fabs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::fabs(tol * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::fabs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  return b;
}

double invert_cdf(const std::function<double(double)>& cdf, double p, double guess,
                  double abs_tol) {
  auto g = [&](double x) { return cdf(x) - p; };
  double step = 1.0;
  double lo = guess - step, hi = guess + step;
  while (g(lo) > 0.0) {
    hi = lo;
    step *= 2.0;
    lo -= step;
    if (step > 1e300) throw std::domain_error("invert_cdf: failed to bracket the quantile");
  }
  step = 1.0;
  while (g(hi) < 0.0) {
    lo = hi;
    step *= 2.0;
    hi += step;
    if (step > 1e300) throw std::domain_error("invert_cdf: failed to bracket the quantile");
  }
  return find_root(g, lo, hi, abs_tol);
}

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

std::pair<double, double> gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {kronrod * half, std::fabs((kronrod - gauss) * half)};
}

double adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
  const auto [value, err] = gk15(f, a, b);
  if (err <= tol || depth <= 0 || std::fabs(b - a) < 1e-15 * (std::fabs(a) + std::fabs(b))) {
    return value;
  }
  const double mid = 0.5 * (a + b);
  return adapt(f, a, mid, 0.5 * tol, depth - 1) + adapt(f, mid, b, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 int max_depth) {
  return adapt(f, a, b, abs_tol, max_depth);
}

double integrate_real_line(const std::function<double(double)>& f, double abs_tol) {
  auto mapped = [&f](double t) {
    const double one_minus = 1.0 - t * t;
    const double x = t / one_minus;
    const double jac = (1.0 + t * t) / (one_minus * one_minus);
    const double v = f(x) * jac;
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(mapped, -1.0, 0.0, 0.5 * abs_tol) + integrate(mapped, 0.0, 1.0, 0.5 * abs_tol);
}

}  // namespace tobitls::special
