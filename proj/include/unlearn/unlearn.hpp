#pragma once

#include <vector>

#include <Eigen/Core>

#include "unlearn/rng.hpp"
#include "unlearn/solver.hpp"

namespace unlearn {

// Set of row indices to be forgotten. Indices are stored sorted and unique.
struct RemovalRequest {
  std::vector<int> indices;

  int m() const { return static_cast<int>(indices.size()); }

  // Validates range/duplicates and m <= n-1.
  static RemovalRequest of(std::vector<int> idx, int n);
  static RemovalRequest random(int n, int m, RngStream& rng);
};

struct UnlearnResult {
  // iterates[0] is the supplied full-data optimum; iterates[t] the t-step
  // Newton update on the leave-M-out objective.
  std::vector<Eigen::VectorXd> iterates;
  Eigen::VectorXd noise;
  Eigen::VectorXd perturbed;  // iterates.back() + noise, exactly
  double scale_used = 0.0;
};

// One Newton update beta - G^{-1}(beta) grad(beta) on the given objective.
Eigen::VectorXd newton_step(const Objective& obj_without, const Eigen::VectorXd& beta);

// T Newton steps on the leave-M-out objective starting from beta_hat,
// then one isotropic Laplace draw with log-density slope epsilon/noise_scale
// added on top (noise_scale = 0 means no noise). The Hessian is recomputed
// and refactorized at every iterate.
UnlearnResult unlearn(const Objective& obj, const Eigen::VectorXd& beta_hat,
                      const RemovalRequest& req, int steps, double noise_scale,
                      double epsilon, RngStream& rng);

// Smallest integer step count T with T > 1 + log2((alpha+1)/(1-3alpha)),
// alpha = log(m+1)/log(n). Throws std::domain_error once alpha >= 1/3,
// i.e. m >= n^{1/3} - 1, where the rule stops applying.
int min_newton_steps(int m, int n);

// || (beta_wo - beta_hat) - Gbar^{-1} sum_{i in M} l_i'(beta_hat) x_i ||
// where Gbar is the leave-M-out Hessian averaged along the segment between
// the two optima by Gauss-Legendre quadrature. Near zero when both inputs
// are converged fits.
double exact_loo_identity_residual(const Objective& obj, const Eigen::VectorXd& beta_hat,
                                   const Eigen::VectorXd& beta_hat_wo,
                                   const RemovalRequest& req, int quadrature_points = 64);

}  // namespace unlearn
