#include "unlearn/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "unlearn/noise.hpp"

namespace unlearn {

TestSampler make_test_sampler(const Dataset& ds, const ModelSpec& spec, double sigma) {
  if (!ds.beta_star) {
    throw std::invalid_argument("make_test_sampler: dataset has no ground truth");
  }
  const Eigen::VectorXd beta_star = *ds.beta_star;
  const double row_scale = 1.0 / std::sqrt(static_cast<double>(ds.meta.n));
  const LossKind loss = spec.loss;
  return [beta_star, row_scale, loss, sigma](RngStream& rng) {
    Eigen::VectorXd x0 = row_scale * rng.gaussian_vector(beta_star.size());
    const double z = x0.dot(beta_star);
    double y0;
    if (loss == LossKind::logistic) {
      y0 = rng.uniform() < sigmoid(z) ? 1.0 : 0.0;
    } else {
      y0 = z + sigma * rng.normal();
    }
    return std::make_pair(y0, std::move(x0));
  };
}

GedEstimate ged_estimate(const ModelSpec& spec, const Eigen::VectorXd& beta_exact,
                         const Eigen::VectorXd& beta_perturbed,
                         const TestSampler& sampler, int n_test, RngStream& rng) {
  if (n_test < 2) throw std::invalid_argument("ged_estimate: need n_test >= 2");
  if (beta_exact.size() != beta_perturbed.size()) {
    throw std::invalid_argument("ged_estimate: dimension mismatch");
  }
  double sum = 0.0, sum_sq = 0.0;
  for (int k = 0; k < n_test; ++k) {
    const auto [y0, x0] = sampler(rng);
    const double gap = std::abs(loss_value(spec.loss, y0, x0.dot(beta_exact)) -
                                loss_value(spec.loss, y0, x0.dot(beta_perturbed)));
    sum += gap;
    sum_sq += gap * gap;
  }
  GedEstimate est;
  est.n_test = n_test;
  est.mean = sum / n_test;
  const double var = (sum_sq - sum * sum / n_test) / (n_test - 1);
  est.std_error = std::sqrt(std::max(0.0, var) / n_test);
  return est;
}

double in_sample_error(const ModelSpec& spec, const Eigen::VectorXd& beta_perturbed,
                       const Eigen::VectorXd& beta_exact, const Dataset& ds,
                       const std::vector<int>& M) {
  if (M.empty()) throw std::invalid_argument("in_sample_error: empty removal set");
  double sum = 0.0;
  for (int i : M) {
    if (i < 0 || i >= ds.meta.n) throw std::invalid_argument("in_sample_error: index out of range");
    sum += point_loss_gap(spec, beta_perturbed, beta_exact, ds.y[i],
                          ds.X.row(i).transpose());
  }
  return sum / static_cast<double>(M.size());
}

double point_loss_gap(const ModelSpec& spec, const Eigen::VectorXd& beta_perturbed,
                      const Eigen::VectorXd& beta_exact, double y0,
                      const Eigen::VectorXd& x0) {
  return std::abs(loss_value(spec.loss, y0, x0.dot(beta_perturbed)) -
                  loss_value(spec.loss, y0, x0.dot(beta_exact)));
}

CertReport certify_check(const Eigen::VectorXd& beta_tilde,
                         const Eigen::VectorXd& beta_exact, double scale,
                         double epsilon, int n_probe, RngStream& rng) {
  if (!(scale > 0.0)) throw std::invalid_argument("certify_check: scale must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("certify_check: epsilon must be > 0");
  if (beta_tilde.size() != beta_exact.size()) {
    throw std::invalid_argument("certify_check: dimension mismatch");
  }

  CertReport rep;
  rep.scale = scale;
  rep.epsilon = epsilon;
  rep.delta_norm = (beta_tilde - beta_exact).norm();
  rep.satisfied = rep.delta_norm <= scale;

  const NoiseSpec spec{static_cast<int>(beta_tilde.size()), scale, epsilon};
  for (int k = 0; k < n_probe; ++k) {
    const Eigen::VectorXd u = beta_tilde + sample_isotropic_laplace(spec, rng);
    const double ratio =
        std::abs(log_density(spec, u - beta_tilde) - log_density(spec, u - beta_exact));
    rep.max_observed_log_ratio = std::max(rep.max_observed_log_ratio, ratio);
  }
  return rep;
}

}  // namespace unlearn
