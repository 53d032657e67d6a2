#pragma once

#include <vector>

#include <Eigen/Core>

#include "unlearn/data.hpp"
#include "unlearn/rng.hpp"
#include "unlearn/solver.hpp"

namespace unlearn {

// Isotropic Laplace law on R^p: density proportional to exp(-(epsilon/r)||b||).
// r = 0 is the degenerate point mass at the origin.
struct NoiseSpec {
  int p = 1;
  double r = 0.0;
  double epsilon = 1.0;

  void validate() const;
};

// Draws ||b|| ~ Gamma(shape=p, rate=epsilon/r) and an independent uniform
// direction on the unit sphere.
Eigen::VectorXd sample_isotropic_laplace(const NoiseSpec& spec, RngStream& rng);

// Exact log density, normalizing constant included:
//   log p(b) = p log C + lgamma(p/2) - log 2 - (p/2) log pi - lgamma(p) - C||b||,
// with C = epsilon/r. Requires r > 0.
double log_density(const NoiseSpec& spec, const Eigen::VectorXd& b);

// Inputs of the closed-form noise-scale calculator for the logistic-ridge
// model family. gamma0 is the n/p aspect ratio; c is the tail-speed
// constant (default 3). The remaining model constants of that family are
// fixed inside the calculator.
struct TheoryConstants {
  double lambda = 1.0;
  double gamma0 = 1.0;
  int n = 1000;
  int p = 1000;
  int m = 1;
  int t = 2;
  double nu = 1.0;
  double c = 3.0;

  void validate() const;
};

// Intermediate constants, exposed so each link of the chain can be checked.
struct TheoryChain {
  double polylog1;
  double c_l;
  double polylog5;
  double c_ll;
  double c_xx;
  double c2;
  double c1;
  double log_scale;  // log of the t-step noise scale
};

TheoryChain theory_chain(const TheoryConstants& tc);

// r_{t} = c1^{2^{t-1}} * (c2 m^3 / (2 lambda nu n))^{2^{t-2}}, evaluated in
// log space.
double theoretical_scale(const TheoryConstants& tc);

// One-step scale in its direct form c1 * m^{3/2} / sqrt(n). Kept as a
// labeled alternative: it differs from theoretical_scale at t=1 by the
// factor sqrt(c2 m^3/(2 lambda nu n)) / (m^{3/2}/sqrt(n)).
double lemma_one_step_scale(const TheoryConstants& tc);

double log_binomial(int n, int k);

struct CalibrationResult {
  int steps = 0;
  double raw_max = 0.0;  // max over sampled subsets of ||exact - t-step||
  double factor = 1.0;   // sqrt(log C(n,m) / log m0)
  double scale = 0.0;    // raw_max * factor
};

// Shared machinery: one subset sample, exact retrains (warm-started from the
// deepest Newton iterate), max norms for every requested step count.
std::vector<CalibrationResult> calibrate_empirical(
    const Objective& obj, const Eigen::VectorXd& beta_hat, int m,
    const std::vector<int>& step_counts, int m0, RngStream& rng, int workers = 1);

// Data-driven scale for one step count: fits the full model, samples m0
// distinct removal sets, and rescales the observed max by
// sqrt(log C(n,m) / log m0).
double empirical_scale(const Dataset& ds, const ModelSpec& spec, int m, int steps,
                       int m0, RngStream& rng, int workers = 1);

}  // namespace unlearn
