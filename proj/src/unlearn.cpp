#include "unlearn/unlearn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "unlearn/noise.hpp"
#include "unlearn/quadrature.hpp"

namespace unlearn {

RemovalRequest RemovalRequest::of(std::vector<int> idx, int n) {
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
    throw std::invalid_argument("removal request: duplicate indices");
  }
  if (!idx.empty() && (idx.front() < 0 || idx.back() >= n)) {
    throw std::invalid_argument("removal request: index out of range [0, n)");
  }
  if (static_cast<int>(idx.size()) > n - 1) {
    throw std::invalid_argument("removal request: must keep at least one row");
  }
  return RemovalRequest{std::move(idx)};
}

RemovalRequest RemovalRequest::random(int n, int m, RngStream& rng) {
  if (m < 0 || m > n - 1) {
    throw std::invalid_argument("removal request: need 0 <= m <= n-1");
  }
  return RemovalRequest{rng.sample_without_replacement(n, m)};
}

Eigen::VectorXd newton_step(const Objective& obj_without, const Eigen::VectorXd& beta) {
  return beta + spd_solve(obj_without.hessian(beta), -obj_without.gradient(beta));
}

UnlearnResult unlearn(const Objective& obj, const Eigen::VectorXd& beta_hat,
                      const RemovalRequest& req, int steps, double noise_scale,
                      double epsilon, RngStream& rng) {
  if (steps < 0) throw std::invalid_argument("unlearn: steps must be >= 0");
  if (noise_scale < 0.0) throw std::invalid_argument("unlearn: noise_scale must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("unlearn: epsilon must be > 0");

  const Objective wo = obj.without(req.indices);
  UnlearnResult res;
  res.scale_used = noise_scale;
  res.iterates.reserve(static_cast<std::size_t>(steps) + 1);
  res.iterates.push_back(beta_hat);
  for (int t = 0; t < steps; ++t) {
    res.iterates.push_back(newton_step(wo, res.iterates.back()));
  }
  res.noise = sample_isotropic_laplace({obj.p(), noise_scale, epsilon}, rng);
  res.perturbed = res.iterates.back() + res.noise;
  return res;
}

int min_newton_steps(int m, int n) {
  if (m < 0 || n < 2) throw std::invalid_argument("min_newton_steps: need m >= 0, n >= 2");
  const double alpha = std::log(static_cast<double>(m) + 1.0) /
                       std::log(static_cast<double>(n));
  if (alpha >= 1.0 / 3.0) {
    throw std::domain_error(
        "min_newton_steps: log(m+1)/log(n) = " + std::to_string(alpha) +
        " >= 1/3; the step rule requires m = o(n^{1/3})");
  }
  const double t_real = 1.0 + std::log2((alpha + 1.0) / (1.0 - 3.0 * alpha));
  // Minimal integer strictly exceeding t_real.
  const double fl = std::floor(t_real);
  return static_cast<int>(fl == t_real ? fl + 1.0 : std::ceil(t_real));
}

double exact_loo_identity_residual(const Objective& obj, const Eigen::VectorXd& beta_hat,
                                   const Eigen::VectorXd& beta_hat_wo,
                                   const RemovalRequest& req, int quadrature_points) {
  if (quadrature_points < 1) {
    throw std::invalid_argument("exact_loo_identity_residual: need quadrature_points >= 1");
  }
  const Objective wo = obj.without(req.indices);
  const QuadratureRule rule = gauss_legendre_01(quadrature_points);

  Eigen::MatrixXd Gbar = Eigen::MatrixXd::Zero(obj.p(), obj.p());
  for (int k = 0; k < quadrature_points; ++k) {
    const double t = rule.nodes[k];
    const Eigen::VectorXd xi = t * beta_hat + (1.0 - t) * beta_hat_wo;
    Gbar += rule.weights[k] * wo.hessian(xi);
  }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(obj.p());
  for (int i : req.indices) {
    const double z = obj.X().row(i).dot(beta_hat);
    rhs += loss_d123(obj.spec().loss, obj.y()[i], z).d1 * obj.X().row(i).transpose();
  }

  const Eigen::VectorXd diff = beta_hat_wo - beta_hat;
  return (diff - spd_solve(Gbar, rhs)).norm();
}

}  // namespace unlearn
