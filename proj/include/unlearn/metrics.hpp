#pragma once

#include <functional>
#include <utility>

#include <Eigen/Core>

#include "unlearn/data.hpp"
#include "unlearn/glm.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

// Draws one fresh (y0, x0) from the same law as the training data.
using TestSampler = std::function<std::pair<double, Eigen::VectorXd>(RngStream&)>;

// Sampler matching a synthetic dataset's generating law. Requires the
// dataset to carry its ground-truth coefficients. sigma is only used by
// the linear family.
TestSampler make_test_sampler(const Dataset& ds, const ModelSpec& spec,
                              double sigma = 1.0);

struct GedEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int n_test = 0;
};

// Monte Carlo estimate of E |l(y0|x0'beta_exact) - l(y0|x0'beta_perturbed)|
// over fresh test points, conditioning on both coefficient vectors (one
// noise draw is already baked into beta_perturbed).
GedEstimate ged_estimate(const ModelSpec& spec, const Eigen::VectorXd& beta_exact,
                         const Eigen::VectorXd& beta_perturbed,
                         const TestSampler& sampler, int n_test, RngStream& rng);

// (1/|M|) sum_{i in M} |l(y_i|x_i'beta_perturbed) - l(y_i|x_i'beta_exact)|.
double in_sample_error(const ModelSpec& spec, const Eigen::VectorXd& beta_perturbed,
                       const Eigen::VectorXd& beta_exact, const Dataset& ds,
                       const std::vector<int>& M);

// Absolute loss gap at a single point.
double point_loss_gap(const ModelSpec& spec, const Eigen::VectorXd& beta_perturbed,
                      const Eigen::VectorXd& beta_exact, double y0,
                      const Eigen::VectorXd& x0);

struct CertReport {
  double delta_norm = 0.0;  // ||beta_tilde - beta_exact||
  double scale = 0.0;
  double epsilon = 0.0;
  bool satisfied = false;   // delta_norm <= scale
  double max_observed_log_ratio = 0.0;
};

// Checks the norm condition delta_norm <= scale directly, then probes it:
// n_probe points are drawn from the perturbed law centered at beta_tilde
// and the largest |log p(u - beta_tilde) - log p(u - beta_exact)| is
// recorded. That maximum can never exceed epsilon * delta_norm / scale.
CertReport certify_check(const Eigen::VectorXd& beta_tilde,
                         const Eigen::VectorXd& beta_exact, double scale,
                         double epsilon, int n_probe, RngStream& rng);

}  // namespace unlearn
