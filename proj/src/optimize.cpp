#include "tobitls/optimize.hpp"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>

namespace tobitls {

void OptimOptions::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0) || !(step_tolerance > 0.0)) {
    throw std::invalid_argument("optimizer tolerances must be positive");
  }
  if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("armijo constant must lie in (0, 1)");
  if (!(contraction > 0.0 && contraction < 1.0)) {
    throw std::invalid_argument("line-search contraction must lie in (0, 1)");
  }
}

Theta starting_values(const TobitDataset& data, const GeneratorFamily& family) {
  const Eigen::Index p = data.p();
  const Eigen::Index nu = data.n() - data.n_censored();
  if (nu < p + 1) {
    throw std::invalid_argument("starting values need at least p + 1 = " + std::to_string(p + 1) +
                                " uncensored cases, found " + std::to_string(nu));
  }
  Eigen::MatrixXd Xu(nu, p);
  Eigen::VectorXd yu(nu);
  for (Eigen::Index i = 0, k = 0; i < data.n(); ++i) {
    if (data.is_censored(i)) continue;
    Xu.row(k) = data.X().row(i);
    yu[k] = data.y()[i];
    ++k;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xu);
  if (qr.rank() < p) {
    throw std::invalid_argument("covariate matrix is rank deficient on the uncensored cases");
  }
  Eigen::VectorXd beta = qr.solve(yu);
  const double rss = (yu - Xu * beta).squaredNorm();
  const double phi = std::max(1e-3, std::sqrt(rss / static_cast<double>(nu - p)));

  auto defaults = default_xi(family.kind());
  const auto free = Theta::default_free_extra(family);
  std::vector<double> xi(family.xi().begin(), family.xi().end());
  for (std::size_t j = 0; j < xi.size(); ++j) {
    if (free[j]) xi[j] = defaults[j];
  }
  return Theta::make(std::move(beta), phi, GeneratorFamily(family.kind(), std::move(xi)));
}

double to_working(Transform t, double v) {
  switch (t) {
    case Transform::Log:
      return std::log(v);
    case Transform::UnitLogistic: {
      const double s = std::min(0.5 * (v + 1.0), 1.0 - 1e-12);
      return std::log(s / (1.0 - s));
    }
    default:
      return v;
  }
}

double to_natural(Transform t, double w) {
  switch (t) {
    case Transform::Log:
      return std::exp(w);
    case Transform::UnitLogistic:
      return -1.0 + 2.0 / (1.0 + std::exp(-w));
    default:
      return w;
  }
}

double working_d1(Transform t, double v) {
  switch (t) {
    case Transform::Log:
      return v;
    case Transform::UnitLogistic:
      return 0.5 * (1.0 + v) * (1.0 - v);
    default:
      return 1.0;
  }
}

double working_d2(Transform t, double v) {
  switch (t) {
    case Transform::Log:
      return v;
    case Transform::UnitLogistic:
      return -0.5 * v * (1.0 + v) * (1.0 - v);
    default:
      return 0.0;
  }
}

std::vector<Transform> working_transforms(const Theta& theta, const OptimOptions& opts) {
  const ParamLayout layout(theta);
  std::vector<Transform> out(static_cast<std::size_t>(layout.size()), Transform::Identity);
  if (layout.has_phi && opts.log_dispersion) out[static_cast<std::size_t>(layout.phi_index())] = Transform::Log;
  for (std::size_t k = 0; k < layout.extras.size(); ++k) {
    out[static_cast<std::size_t>(layout.extra_index(k))] =
        theta.family.kind() == GeneratorKind::PowerExponential ? Transform::UnitLogistic : Transform::Log;
  }
  return out;
}

OptimResult maximize_loglik(const TobitDataset& data, const Theta& start, const OptimOptions& opts,
                            const std::vector<bool>& fixed) {
  start.validate();
  const Eigen::VectorXd natural0 = pack(start);
  const auto total = static_cast<std::size_t>(natural0.size());
  if (!fixed.empty() && fixed.size() != total) {
    throw std::invalid_argument("fixed mask must match the packed parameter layout");
  }
  std::vector<Eigen::Index> free_idx;
  for (std::size_t j = 0; j < total; ++j) {
    if (fixed.empty() || !fixed[j]) free_idx.push_back(static_cast<Eigen::Index>(j));
  }
  const auto map = working_transforms(start, opts);

  auto to_theta = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd nat = natural0;
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      const auto j = free_idx[k];
      nat[j] = to_natural(map[static_cast<std::size_t>(j)], w[static_cast<Eigen::Index>(k)]);
    }
    return unpack(start, nat);
  };

  std::function<double(const Eigen::VectorXd&)> objective = [&](const Eigen::VectorXd& w) {
    const Theta t = to_theta(w);
    if (!(t.phi > 0.0)) return -std::numeric_limits<double>::infinity();
    return loglik(t, data);
  };
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient = [&](const Eigen::VectorXd& w) {
    const Theta t = to_theta(w);
    const Eigen::VectorXd g = score(t, data);
    const Eigen::VectorXd nat = pack(t);
    Eigen::VectorXd gw(static_cast<Eigen::Index>(free_idx.size()));
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      const auto j = free_idx[k];
      gw[static_cast<Eigen::Index>(k)] = g[j] * working_d1(map[static_cast<std::size_t>(j)], nat[j]);
    }
    return gw;
  };

  Eigen::VectorXd w0(static_cast<Eigen::Index>(free_idx.size()));
  for (std::size_t k = 0; k < free_idx.size(); ++k) {
    const auto j = free_idx[k];
    w0[static_cast<Eigen::Index>(k)] = to_working(map[static_cast<std::size_t>(j)], natural0[j]);
  }

  const auto trace = bfgs_maximize<double>(objective, gradient, w0, opts);
  OptimResult r;
  r.theta_hat = to_theta(trace.x);
  r.loglik_at_max = trace.value;
  r.iterations = trace.iterations;
  r.converged = trace.converged;
  r.final_gradient_norm = trace.gradient_norm;
  r.skipped_updates = trace.skipped_updates;
  r.message = trace.message;
  return r;
}

}  // namespace tobitls
