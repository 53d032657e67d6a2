#include "unlearn/noise.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "unlearn/errors.hpp"
#include "unlearn/unlearn.hpp"

namespace unlearn {

void NoiseSpec::validate() const {
  if (p < 1) throw std::invalid_argument("noise: dimension p must be >= 1");
  if (r < 0.0 || !std::isfinite(r)) throw std::invalid_argument("noise: scale r must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("noise: epsilon must be > 0");
}

Eigen::VectorXd sample_isotropic_laplace(const NoiseSpec& spec, RngStream& rng) {
  spec.validate();
  if (spec.r == 0.0) return Eigen::VectorXd::Zero(spec.p);
  const double radius = rng.gamma(static_cast<double>(spec.p)) * spec.r / spec.epsilon;
  Eigen::VectorXd dir = rng.gaussian_vector(spec.p);
  while (dir.norm() == 0.0) dir = rng.gaussian_vector(spec.p);
  return radius * dir / dir.norm();
}

double log_density(const NoiseSpec& spec, const Eigen::VectorXd& b) {
  spec.validate();
  if (spec.r == 0.0) throw std::invalid_argument("log_density: degenerate scale r = 0");
  if (b.size() != spec.p) throw std::invalid_argument("log_density: wrong dimension");
  const double p = static_cast<double>(spec.p);
  const double log_c = std::log(spec.epsilon / spec.r);
  return p * log_c + std::lgamma(p / 2.0) - std::log(2.0) -
         (p / 2.0) * std::log(M_PI) - std::lgamma(p) -
         (spec.epsilon / spec.r) * b.norm();
}

void TheoryConstants::validate() const {
  if (!(lambda > 0.0) || !(gamma0 > 0.0) || !(nu > 0.0) || !(c > 0.0)) {
    throw std::invalid_argument("theory constants: lambda, gamma0, nu, c must be > 0");
  }
  if (n < 1 || p < 1 || m < 1 || t < 1) {
    throw std::invalid_argument("theory constants: n, p, m, t must be >= 1");
  }
}

TheoryChain theory_chain(const TheoryConstants& tc) {
  tc.validate();
  const double lambda = tc.lambda;
  const double logn = std::log(static_cast<double>(tc.n));
  const double sqrt_gamma0 = std::sqrt(tc.gamma0);
  const double m = static_cast<double>(tc.m);
  const double p = static_cast<double>(tc.p);

  TheoryChain ch;
  ch.polylog1 = 4.0 * std::sqrt(2.0 * tc.gamma0 * logn / lambda);
  ch.c_l = ch.polylog1 + 8.0 / lambda;
  ch.polylog5 = 4.0 * (sqrt_gamma0 + 3.0) / lambda * std::sqrt(m * (2.0 * m + 3.0) / p * logn);
  ch.c_ll = 4.0 + 8.0 / lambda + ch.polylog1 + ch.polylog5;
  ch.c_xx = (sqrt_gamma0 + 3.0) / lambda * std::sqrt(m / p * (1.0 + 16.0 * logn));
  ch.c2 = (sqrt_gamma0 + 4.0) * (sqrt_gamma0 + 4.0) * ch.c_ll;
  ch.c1 = 2.0 / (std::sqrt(3.0) * lambda * lambda) * ch.c2 * ch.c_l * ch.c_l * ch.c_xx;

  const double log_q = std::log(ch.c2) + 3.0 * std::log(m) -
                       std::log(2.0 * lambda * tc.nu * static_cast<double>(tc.n));
  ch.log_scale = std::pow(2.0, tc.t - 1) * std::log(ch.c1) +
                 std::pow(2.0, tc.t - 2) * log_q;
  return ch;
}

double theoretical_scale(const TheoryConstants& tc) {
  return std::exp(theory_chain(tc).log_scale);
}

double lemma_one_step_scale(const TheoryConstants& tc) {
  const TheoryChain ch = theory_chain(tc);
  const double m = static_cast<double>(tc.m);
  return ch.c1 * std::pow(m, 1.5) / std::sqrt(static_cast<double>(tc.n));
}

double log_binomial(int n, int k) {
  if (k < 0 || k > n) throw std::invalid_argument("log_binomial: need 0 <= k <= n");
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::vector<CalibrationResult> calibrate_empirical(
    const Objective& obj, const Eigen::VectorXd& beta_hat, int m,
    const std::vector<int>& step_counts, int m0, RngStream& rng, int workers) {
  if (m0 < 2) throw std::invalid_argument("calibrate_empirical: need m0 >= 2");
  if (m < 1 || m > obj.n() - 1) {
    throw std::invalid_argument("calibrate_empirical: need 1 <= m <= n-1");
  }
  if (step_counts.empty()) throw std::invalid_argument("calibrate_empirical: no step counts");
  const double log_total = log_binomial(obj.n(), m);
  if (log_total < std::log(static_cast<double>(m0)) - 1e-9) {
    throw std::invalid_argument("calibrate_empirical: fewer than m0 distinct subsets exist");
  }

  // Distinct subsets, drawn sequentially so the sample depends only on rng.
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> subsets;
  subsets.reserve(static_cast<std::size_t>(m0));
  while (static_cast<int>(subsets.size()) < m0) {
    auto s = rng.sample_without_replacement(obj.n(), m);
    if (seen.insert(s).second) subsets.push_back(std::move(s));
  }

  const int max_steps = *std::max_element(step_counts.begin(), step_counts.end());
  const int n_workers = std::max(1, workers);
  const double tol = default_tol_abs(obj.p());

  std::vector<std::vector<double>> norms(
      subsets.size(), std::vector<double>(step_counts.size(), 0.0));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&]() {
    try {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= subsets.size()) return;
        const Objective wo = obj.without(subsets[k]);
        std::vector<Eigen::VectorXd> iterates{beta_hat};
        for (int t = 0; t < max_steps; ++t) {
          iterates.push_back(newton_step(wo, iterates.back()));
        }
        const FitResult exact = fit(wo, iterates.back(), tol);
        if (!exact.converged) {
          throw NumericalError("calibrate_empirical: retrain did not converge");
        }
        const Eigen::VectorXd polished = newton_polish(wo, exact.beta);
        for (std::size_t si = 0; si < step_counts.size(); ++si) {
          norms[k][si] =
              (polished - iterates[static_cast<std::size_t>(step_counts[si])]).norm();
        }
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  const double factor = std::sqrt(log_total / std::log(static_cast<double>(m0)));
  std::vector<CalibrationResult> out;
  out.reserve(step_counts.size());
  for (std::size_t si = 0; si < step_counts.size(); ++si) {
    CalibrationResult cr;
    cr.steps = step_counts[si];
    for (std::size_t k = 0; k < subsets.size(); ++k) {
      cr.raw_max = std::max(cr.raw_max, norms[k][si]);
    }
    cr.factor = factor;
    cr.scale = cr.raw_max * factor;
    out.push_back(cr);
  }
  return out;
}

double empirical_scale(const Dataset& ds, const ModelSpec& spec, int m, int steps,
                       int m0, RngStream& rng, int workers) {
  if (steps < 1) throw std::invalid_argument("empirical_scale: need steps >= 1");
  Objective obj(spec, ds.X, ds.y);
  const FitResult full = fit(obj);
  if (!full.converged) throw NumericalError("empirical_scale: full fit did not converge");
  return calibrate_empirical(obj, full.beta, m, {steps}, m0, rng, workers)[0].scale;
}

}  // namespace unlearn
