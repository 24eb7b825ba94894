#pragma once

// Left-censored (tobit) regression with log-symmetric errors.
//
// On the log scale, Y*_i = x_i' beta + phi * eps_i with eps_i ~ S(0, 1, g).
// Cases with Y*_i <= gamma are recorded at gamma and flagged as censored.

#include "tobitls/lsdist.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace tobitls {

class TobitDataset {
 public:
  /// Validates the left-censoring contract: censored y equal gamma, uncensored
  /// y strictly above gamma. Throws std::invalid_argument otherwise.
  static TobitDataset create(Eigen::VectorXd y, std::vector<bool> censored, Eigen::MatrixXd X,
                             double gamma, std::vector<std::string> covariate_names = {});

  const Eigen::VectorXd& y() const { return y_; }
  const std::vector<bool>& censored() const { return censored_; }
  bool is_censored(Eigen::Index i) const { return censored_[static_cast<std::size_t>(i)]; }
  const Eigen::MatrixXd& X() const { return X_; }
  double gamma() const { return gamma_; }
  Eigen::Index n() const { return y_.size(); }
  Eigen::Index p() const { return X_.cols(); }
  Eigen::Index n_censored() const { return n_censored_; }
  const std::vector<std::string>& covariate_names() const { return names_; }

  /// Rows [0, n) except `row`.
  TobitDataset without_row(Eigen::Index row) const;

 private:
  TobitDataset() = default;
  Eigen::VectorXd y_;
  std::vector<bool> censored_;
  Eigen::MatrixXd X_;
  double gamma_ = 0.0;
  Eigen::Index n_censored_ = 0;
  std::vector<std::string> names_;
};

/// Model parameters. For Birnbaum-Saunders kinds phi is pinned to
/// kBirnbaumSaundersDispersion and is not a free parameter.
struct Theta {
  Eigen::VectorXd beta;
  double phi = 1.0;
  GeneratorFamily family = GeneratorFamily::normal();
  std::vector<bool> free_extra;

  /// Free-extra defaults: Birnbaum-Saunders kinds estimate xi1; everything
  /// else keeps its extra parameters fixed.
  static Theta make(Eigen::VectorXd beta, double phi, GeneratorFamily family);
  static std::vector<bool> default_free_extra(const GeneratorFamily& family);

  bool phi_free() const { return !family.fixed_dispersion().has_value(); }
  /// Throws std::invalid_argument on phi <= 0, a Birnbaum-Saunders phi other
  /// than the fixed value, or a free_extra mask of the wrong size.
  void validate() const;
};

/// Positions of the free parameters inside the packed vector
/// [beta, phi (if free), free extras...].
struct ParamLayout {
  Eigen::Index p = 0;
  bool has_phi = true;
  std::vector<std::size_t> extras;  // indices into family.xi()

  explicit ParamLayout(const Theta& theta);
  Eigen::Index size() const { return p + (has_phi ? 1 : 0) + static_cast<Eigen::Index>(extras.size()); }
  Eigen::Index phi_index() const { return p; }
  Eigen::Index extra_index(std::size_t k) const { return p + (has_phi ? 1 : 0) + static_cast<Eigen::Index>(k); }
};

Eigen::VectorXd pack(const Theta& theta);
Theta unpack(const Theta& like, const Eigen::Ref<const Eigen::VectorXd>& packed);
/// "intercept"/covariate names, then "phi", then "xi1"/"xi2".
std::vector<std::string> parameter_names(const Theta& theta, const TobitDataset& data);

struct StandardizedResiduals {
  Eigen::VectorXd zeta_c;  // (gamma - x_i' beta) / phi, censored cases in data order
  Eigen::VectorXd zeta;    // (y_i - x_i' beta) / phi, uncensored cases in data order
};

StandardizedResiduals standardize(const Theta& theta, const TobitDataset& data);

/// Per-case standardized value: zeta_c for censored rows, zeta otherwise.
Eigen::VectorXd standardized_all(const Theta& theta, const TobitDataset& data);

/// Per-case log-likelihood terms. Censored terms that underflow are -inf.
Eigen::VectorXd loglik_contributions(const Theta& theta, const TobitDataset& data);
double loglik(const Theta& theta, const TobitDataset& data);

/// Analytic gradient of loglik with respect to pack(theta).
Eigen::VectorXd score(const Theta& theta, const TobitDataset& data);

/// Analytic Hessian of loglik with respect to pack(theta). Rows and columns
/// belonging to free extra parameters are filled by central differences of
/// the score.
Eigen::MatrixXd hessian(const Theta& theta, const TobitDataset& data);

}  // namespace tobitls
