#pragma once

// Special functions needed by the log-symmetric kernels and the chi-square
// calibration. Everything here works in double precision and targets
// roughly 1e-13 relative accuracy over the ranges the model touches.

#include <functional>

namespace tobitls::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kSqrt2 = 1.41421356237309504880;

/// log Gamma(x) for x > 0 (Lanczos, g = 7).
double log_gamma(double x);

/// log B(a, b).
double log_beta(double a, double b);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);
/// log Q(a, x), accurate far into the upper tail.
double log_gamma_q(double a, double x);
/// log P(a, x), accurate for small x.
double log_gamma_p(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);
/// log I_x(a, b), accurate when I_x is tiny.
double log_beta_inc(double a, double b, double x);

double normal_pdf(double z);
double normal_cdf(double z);
/// log Phi(z) without underflow for very negative z.
double log_normal_cdf(double z);
double normal_quantile(double p);

double student_t_log_pdf(double t, double nu);
double student_t_cdf(double t, double nu);
double student_t_log_cdf(double t, double nu);
double student_t_quantile(double p, double nu);

/// Upper tail of chi-square with r degrees of freedom, Q(r/2, x/2).
double chi2_upper_tail(double x, int r);
/// x such that chi2_upper_tail(x, r) == alpha.
double chi2_upper_quantile(double alpha, int r);

/// Brent's method on a sign-changing bracket [lo, hi].
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double abs_tol = 1e-14, int max_iter = 300);

/// Solves cdf(x) == p by expanding a bracket around `guess` and then running
/// Brent. `cdf` must be non-decreasing.
double invert_cdf(const std::function<double(double)>& cdf, double p, double guess = 0.0,
                  double abs_tol = 1e-13);

/// Adaptive Gauss-Kronrod (7/15) on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-13, int max_depth = 40);

/// Integral over the whole real line via the map x = t / (1 - t^2).
double integrate_real_line(const std::function<double(double)>& f, double abs_tol = 1e-13);

}  // namespace tobitls::special
