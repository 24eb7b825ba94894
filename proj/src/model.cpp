#include "tobitls/model.hpp"

#include "tobitls/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tobitls {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// f_Z(z) / F_Z(z) for a censored case.
double inverse_mills(const GeneratorFamily& f, double z) {
  return std::exp(sym_log_pdf(f, z) - sym_log_cdf(f, z));
}

// d/dxi of a single log-likelihood term, analytic where the kernel admits a
// simple closed form.
bool has_analytic_extra(const GeneratorFamily& f, std::size_t j) {
  return j == 0 && (f.kind() == GeneratorKind::BirnbaumSaunders ||
                    f.kind() == GeneratorKind::BirnbaumSaundersT);
}

double analytic_extra_term(const GeneratorFamily& f, double z, bool censored) {
  const double xi1 = f.xi(0);
  const double w = 2.0 / xi1 * std::sinh(z);
  if (f.kind() == GeneratorKind::BirnbaumSaunders) {
    if (censored) {
      if (std::isinf(w)) return 0.0;
      const double lambda = std::exp(-0.5 * w * w - special::kLogSqrt2Pi - special::log_normal_cdf(w));
      return -lambda * w / xi1;
    }
    return -1.0 / xi1 + w * w / xi1;
  }
  const double nu = f.xi(1);
  if (censored) {
    if (std::isinf(w)) return 0.0;
    const double lambda = std::exp(special::student_t_log_pdf(w, nu) - special::student_t_log_cdf(w, nu));
    return -lambda * w / xi1;
  }
  const double share = std::isinf(w) ? 1.0 : w * w / (nu + w * w);
  return (nu + 1.0) * share / xi1 - 1.0 / xi1;
}

// Derivative of loglik in one extra parameter by finite differences, staying
// inside the admissible range.
double extra_partial_fd(const Theta& theta, const TobitDataset& data, std::size_t j) {
  const double x = theta.family.xi(j);
  const double h = 1e-3 * std::max(1.0, std::fabs(x));
  auto at = [&](double v) {
    Theta t = theta;
    t.family = theta.family.with_xi(j, v);
    return loglik(t, data);
  };
  const auto& f = theta.family;
  if (f.xi_admissible(j, x - 2.0 * h) && f.xi_admissible(j, x + 2.0 * h)) {
    return (at(x - 2.0 * h) - 8.0 * at(x - h) + 8.0 * at(x + h) - at(x + 2.0 * h)) / (12.0 * h);
  }
  const double hs = 1e-5 * std::max(1.0, std::fabs(x));
  if (f.xi_admissible(j, x - 2.0 * hs)) {
    return (3.0 * at(x) - 4.0 * at(x - hs) + at(x - 2.0 * hs)) / (2.0 * hs);
  }
  return (-3.0 * at(x) + 4.0 * at(x + hs) - at(x + 2.0 * hs)) / (2.0 * hs);
}

// Working quantities for the (beta, phi) block. For uncensored cases d1/d2
// are the first two z-derivatives of log f_Z; for censored cases they are
// Omega and Omega'. The algebra of the derivatives is then shared.
struct CaseTerms {
  Eigen::VectorXd z;
  Eigen::VectorXd d1;
  Eigen::VectorXd d2;
};

CaseTerms case_terms(const Theta& theta, const TobitDataset& data, bool second) {
  const Eigen::VectorXd z = standardized_all(theta, data);
  const auto& f = theta.family;
  CaseTerms out{z, Eigen::VectorXd(z.size()), Eigen::VectorXd(second ? z.size() : 0)};
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (data.is_censored(i)) {
      const double omega = inverse_mills(f, z[i]);
      out.d1[i] = omega;
      if (second) out.d2[i] = omega * sym_dlog_pdf(f, z[i]) - omega * omega;
    } else {
      out.d1[i] = sym_dlog_pdf(f, z[i]);
      if (second) out.d2[i] = sym_d2log_pdf(f, z[i]);
    }
  }
  return out;
}

}  // namespace

TobitDataset TobitDataset::create(Eigen::VectorXd y, std::vector<bool> censored, Eigen::MatrixXd X,
                                  double gamma, std::vector<std::string> covariate_names) {
  const auto n = y.size();
  if (static_cast<Eigen::Index>(censored.size()) != n || X.rows() != n) {
    throw std::invalid_argument("dataset: y, censored and X must have the same number of rows");
  }
  if (X.cols() < 1) throw std::invalid_argument("dataset: X needs at least one column");
  if (!std::isfinite(gamma)) throw std::invalid_argument("dataset: gamma must be finite");
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("dataset: non-finite values");
  if (covariate_names.empty()) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) covariate_names.push_back("x" + std::to_string(j));
  }
  if (static_cast<Eigen::Index>(covariate_names.size()) != X.cols()) {
    throw std::invalid_argument("dataset: one name per covariate column is required");
  }
  TobitDataset d;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (censored[static_cast<std::size_t>(i)]) {
      if (y[i] != gamma) {
        throw std::invalid_argument("dataset: censored row " + std::to_string(i) +
                                    " must carry y == gamma");
      }
      ++d.n_censored_;
    } else if (!(y[i] > gamma)) {
      throw std::invalid_argument("dataset: uncensored row " + std::to_string(i) +
                                  " has y <= gamma");
    }
  }
  d.y_ = std::move(y);
  d.censored_ = std::move(censored);
  d.X_ = std::move(X);
  d.gamma_ = gamma;
  d.names_ = std::move(covariate_names);
  return d;
}

TobitDataset TobitDataset::without_row(Eigen::Index row) const {
  const Eigen::Index n = this->n();
  Eigen::VectorXd y(n - 1);
  Eigen::MatrixXd X(n - 1, p());
  std::vector<bool> c;
  for (Eigen::Index i = 0, k = 0; i < n; ++i) {
    if (i == row) continue;
    y[k] = y_[i];
    X.row(k) = X_.row(i);
    c.push_back(censored_[static_cast<std::size_t>(i)]);
    ++k;
  }
  return create(std::move(y), std::move(c), std::move(X), gamma_, names_);
}

std::vector<bool> Theta::default_free_extra(const GeneratorFamily& family) {
  std::vector<bool> mask(family.extra_count(), false);
  if (family.fixed_dispersion()) mask[0] = true;
  return mask;
}

Theta Theta::make(Eigen::VectorXd beta, double phi, GeneratorFamily family) {
  Theta t;
  t.beta = std::move(beta);
  if (auto fixed = family.fixed_dispersion()) phi = *fixed;
  t.phi = phi;
  t.free_extra = default_free_extra(family);
  t.family = std::move(family);
  t.validate();
  return t;
}

void Theta::validate() const {
  if (!(phi > 0.0) || !std::isfinite(phi)) throw std::invalid_argument("phi must be positive");
  if (auto fixed = family.fixed_dispersion(); fixed && phi != *fixed) {
    throw std::invalid_argument(family.name() + " requires phi = " + std::to_string(*fixed));
  }
  if (free_extra.size() != family.extra_count()) {
    throw std::invalid_argument("free_extra mask must have one entry per extra parameter");
  }
  if (!beta.allFinite()) throw std::invalid_argument("beta must be finite");
}

ParamLayout::ParamLayout(const Theta& theta)
    : p(theta.beta.size()), has_phi(theta.phi_free()) {
  for (std::size_t j = 0; j < theta.free_extra.size(); ++j) {
    if (theta.free_extra[j]) extras.push_back(j);
  }
}

Eigen::VectorXd pack(const Theta& theta) {
  const ParamLayout layout(theta);
  Eigen::VectorXd v(layout.size());
  v.head(layout.p) = theta.beta;
  if (layout.has_phi) v[layout.phi_index()] = theta.phi;
  for (std::size_t k = 0; k < layout.extras.size(); ++k) {
    v[layout.extra_index(k)] = theta.family.xi(layout.extras[k]);
  }
  return v;
}

Theta unpack(const Theta& like, const Eigen::Ref<const Eigen::VectorXd>& packed) {
  const ParamLayout layout(like);
  if (packed.size() != layout.size()) throw std::invalid_argument("unpack: size mismatch");
  Theta t = like;
  t.beta = packed.head(layout.p);
  if (layout.has_phi) t.phi = packed[layout.phi_index()];
  for (std::size_t k = 0; k < layout.extras.size(); ++k) {
    t.family = t.family.with_xi(layout.extras[k], packed[layout.extra_index(k)]);
  }
  return t;
}

std::vector<std::string> parameter_names(const Theta& theta, const TobitDataset& data) {
  const ParamLayout layout(theta);
  std::vector<std::string> names = data.covariate_names();
  if (layout.has_phi) names.emplace_back("phi");
  for (auto j : layout.extras) names.push_back("xi" + std::to_string(j + 1));
  return names;
}

Eigen::VectorXd standardized_all(const Theta& theta, const TobitDataset& data) {
  if (!(theta.phi > 0.0)) throw std::invalid_argument("standardize: phi must be positive");
  if (theta.beta.size() != data.p()) {
    throw std::invalid_argument("standardize: beta has " + std::to_string(theta.beta.size()) +
                                " entries but X has " + std::to_string(data.p()) + " columns");
  }
  // Censored rows already carry y == gamma.
  return (data.y() - data.X() * theta.beta) / theta.phi;
}

StandardizedResiduals standardize(const Theta& theta, const TobitDataset& data) {
  const Eigen::VectorXd z = standardized_all(theta, data);
  StandardizedResiduals out{Eigen::VectorXd(data.n_censored()),
                            Eigen::VectorXd(data.n() - data.n_censored())};
  for (Eigen::Index i = 0, c = 0, u = 0; i < z.size(); ++i) {
    if (data.is_censored(i)) {
      out.zeta_c[c++] = z[i];
    } else {
      out.zeta[u++] = z[i];
    }
  }
  return out;
}

Eigen::VectorXd loglik_contributions(const Theta& theta, const TobitDataset& data) {
  const Eigen::VectorXd z = standardized_all(theta, data);
  const double log_phi = std::log(theta.phi);
  Eigen::VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out[i] = data.is_censored(i) ? sym_log_cdf(theta.family, z[i])
                                 : sym_log_pdf(theta.family, z[i]) - log_phi;
  }
  return out;
}

double loglik(const Theta& theta, const TobitDataset& data) {
  const double total = loglik_contributions(theta, data).sum();
  return std::isnan(total) ? kNegInf : total;
}

Eigen::VectorXd score(const Theta& theta, const TobitDataset& data) {
  const ParamLayout layout(theta);
  const double phi = theta.phi;
  const CaseTerms t = case_terms(theta, data, false);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(layout.size());
  g.head(layout.p) = -(data.X().transpose() * t.d1) / phi;
  if (layout.has_phi) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < t.z.size(); ++i) {
      s += data.is_censored(i) ? -t.d1[i] * t.z[i] / phi : -(1.0 + t.d1[i] * t.z[i]) / phi;
    }
    g[layout.phi_index()] = s;
  }
  for (std::size_t k = 0; k < layout.extras.size(); ++k) {
    const auto j = layout.extras[k];
    double s = 0.0;
    if (has_analytic_extra(theta.family, j)) {
      for (Eigen::Index i = 0; i < t.z.size(); ++i) {
        s += analytic_extra_term(theta.family, t.z[i], data.is_censored(i));
      }
    } else {
      s = extra_partial_fd(theta, data, j);
    }
    g[layout.extra_index(k)] = s;
  }
  return g;
}

Eigen::MatrixXd hessian(const Theta& theta, const TobitDataset& data) {
  const ParamLayout layout(theta);
  const double phi = theta.phi;
  const double phi2 = phi * phi;
  const CaseTerms t = case_terms(theta, data, true);
  const auto& X = data.X();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(layout.size(), layout.size());

  H.topLeftCorner(layout.p, layout.p) = X.transpose() * t.d2.asDiagonal() * X / phi2;
  if (layout.has_phi) {
    const Eigen::VectorXd cross = t.d2.cwiseProduct(t.z) + t.d1;
    const Eigen::VectorXd bphi = X.transpose() * cross / phi2;
    const auto k = layout.phi_index();
    H.block(0, k, layout.p, 1) = bphi;
    H.block(k, 0, 1, layout.p) = bphi.transpose();
    double s = 0.0;
    for (Eigen::Index i = 0; i < t.z.size(); ++i) {
      const double z = t.z[i];
      s += t.d2[i] * z * z + 2.0 * t.d1[i] * z + (data.is_censored(i) ? 0.0 : 1.0);
    }
    H(k, k) = s / phi2;
  }

  // Extra-parameter rows by central differences of the score.
  for (std::size_t k = 0; k < layout.extras.size(); ++k) {
    const auto j = layout.extras[k];
    const auto col = layout.extra_index(k);
    const double x = theta.family.xi(j);
    double h = 1e-5 * std::max(1.0, std::fabs(x));
    Theta lo = theta, hi = theta;
    double span = 2.0 * h;
    if (theta.family.xi_admissible(j, x + h) && theta.family.xi_admissible(j, x - h)) {
      lo.family = theta.family.with_xi(j, x - h);
      hi.family = theta.family.with_xi(j, x + h);
    } else if (theta.family.xi_admissible(j, x - h)) {
      lo.family = theta.family.with_xi(j, x - h);
      span = h;
    } else {
      hi.family = theta.family.with_xi(j, x + h);
      span = h;
    }
    const Eigen::VectorXd dcol = (score(hi, data) - score(lo, data)) / span;
    for (Eigen::Index r = 0; r < layout.size(); ++r) {
      if (r >= layout.extra_index(0) && r < col) continue;  // filled by the earlier column
      H(r, col) = dcol[r];
      H(col, r) = dcol[r];
    }
  }
  // The matrix products above are symmetric only up to rounding.
  return 0.5 * (H + H.transpose());
}

}  // namespace tobitls
