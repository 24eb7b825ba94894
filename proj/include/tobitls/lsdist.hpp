#pragma once

// Symmetric and log-symmetric distributions built from a density generator g.
//
// A standard symmetric variable Z has density f_Z(z) = g(z^2), with g
// normalized so that the integral of u^{-1/2} g(u) over (0, inf) is one. The
// log-symmetric variable T = eta * exp(phi * Z) has median eta and
// dispersion phi.

#include <Eigen/Core>

#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tobitls {

using Rng = std::mt19937_64;

enum class GeneratorKind { Normal, StudentT, PowerExponential, BirnbaumSaunders, BirnbaumSaundersT };

/// A density generator together with its extra parameters xi.
///
/// Instances are validated on construction and immutable afterwards.
class GeneratorFamily {
 public:
  /// Throws std::invalid_argument when xi has the wrong length or leaves the
  /// admissible range of the kind.
  GeneratorFamily(GeneratorKind kind, std::vector<double> xi = {});

  static GeneratorFamily normal() { return GeneratorFamily(GeneratorKind::Normal); }
  static GeneratorFamily student_t(double nu) { return {GeneratorKind::StudentT, {nu}}; }
  static GeneratorFamily power_exponential(double xi) {
    return {GeneratorKind::PowerExponential, {xi}};
  }
  static GeneratorFamily birnbaum_saunders(double xi) {
    return {GeneratorKind::BirnbaumSaunders, {xi}};
  }
  static GeneratorFamily birnbaum_saunders_t(double xi1, double xi2) {
    return {GeneratorKind::BirnbaumSaundersT, {xi1, xi2}};
  }

  /// Parses "normal", "student-t", "power-exponential", "birnbaum-saunders",
  /// "birnbaum-saunders-t". Missing xi values fall back to the defaults.
  static GeneratorFamily parse(std::string_view name, std::vector<double> xi = {});

  GeneratorKind kind() const { return kind_; }
  std::span<const double> xi() const { return xi_; }
  double xi(std::size_t i) const { return xi_.at(i); }
  std::size_t extra_count() const { return xi_.size(); }
  std::string name() const;

  /// Copy with one extra parameter replaced (validated).
  GeneratorFamily with_xi(std::size_t i, double value) const;

  /// Birnbaum-Saunders kinds tie the dispersion to a fixed value.
  std::optional<double> fixed_dispersion() const;

  /// log of the constant c making c * kernel(z^2) a density on the real line.
  double log_normalizer() const { return log_norm_; }

  /// True when xi[i] lies in the admissible range for this kind.
  bool xi_admissible(std::size_t i, double value) const;

  friend bool operator==(const GeneratorFamily&, const GeneratorFamily&) = default;

 private:
  GeneratorKind kind_;
  std::vector<double> xi_;
  double log_norm_ = 0.0;
};

std::string_view kind_name(GeneratorKind kind);
/// Default extra parameters for a kind (t: 4, PE: 0.5, BS: 1, BS-t: (1, 4)).
std::vector<double> default_xi(GeneratorKind kind);
/// The dispersion value Birnbaum-Saunders kinds are fixed at.
inline constexpr double kBirnbaumSaundersDispersion = 4.0;

struct LogSymmetricParams {
  double eta;
  double phi;
  GeneratorFamily family;

  /// Throws std::invalid_argument unless eta > 0 and phi > 0.
  LogSymmetricParams(double eta, double phi, GeneratorFamily family);
};

// Generator-level functions (argument u = z^2 >= 0).

double normalizing_constant(const GeneratorFamily& family);
/// log of the normalized generator at u.
double log_g(const GeneratorFamily& family, double u);
/// g'(u) / g(u).
double v_weight(const GeneratorFamily& family, double u);
/// d/du of v_weight.
double v_weight_prime(const GeneratorFamily& family, double u);

// Standard symmetric law S(0, 1, g).

double sym_log_pdf(const GeneratorFamily& family, double z);
double sym_pdf(const GeneratorFamily& family, double z);
double sym_cdf(const GeneratorFamily& family, double z);
double sym_log_cdf(const GeneratorFamily& family, double z);
double sym_quantile(const GeneratorFamily& family, double p);
/// d/dz log f_Z(z).
double sym_dlog_pdf(const GeneratorFamily& family, double z);
/// d^2/dz^2 log f_Z(z).
double sym_d2log_pdf(const GeneratorFamily& family, double z);

/// |integral of f_Z - 1| by adaptive quadrature. Used as a self-check on
/// the closed-form normalizing constants.
double normalization_defect(const GeneratorFamily& family);

// Log-symmetric law LS(eta, phi^2, g).

double ls_pdf(const LogSymmetricParams& params, double t);
double ls_cdf(const LogSymmetricParams& params, double t);
double ls_quantile(const LogSymmetricParams& params, double p);

// Samplers. Only the caller-owned engine is mutated.

double sym_draw(const GeneratorFamily& family, Rng& rng);
Eigen::VectorXd sym_sample(const GeneratorFamily& family, Rng& rng, Eigen::Index n);
Eigen::VectorXd ls_sample(const LogSymmetricParams& params, Rng& rng, Eigen::Index n);

}  // namespace tobitls
