#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "unlearn/glm.hpp"

namespace unlearn {

// Row-restricted regularized ERM objective
//
//   L(beta) = sum_{i in active} l(y_i | x_i' beta) + lambda * r(beta).
//
// Immutable once built. Leave-M-out variants created through without()
// share the underlying data, so spawning one per removal request is cheap
// and many of them can be evaluated concurrently.
class Objective {
 public:
  Objective(ModelSpec spec, Eigen::MatrixXd X, Eigen::VectorXd y);

  // Same data with the given rows excluded. Requires at least one row left.
  Objective without(const std::vector<int>& removed) const;

  int n() const { return static_cast<int>(X_->rows()); }
  int p() const { return static_cast<int>(X_->cols()); }
  int n_active() const { return static_cast<int>(active_.size()); }
  const ModelSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& X() const { return *X_; }
  const Eigen::VectorXd& y() const { return *y_; }
  const std::vector<int>& active() const { return active_; }

  double value(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
  // X_a' diag(l_i'') X_a + lambda * hess(r); SPD since lambda*nu > 0.
  Eigen::MatrixXd hessian(const Eigen::VectorXd& beta) const;

 private:
  Objective() = default;
  void check_dim(const Eigen::VectorXd& beta) const;

  ModelSpec spec_;
  std::shared_ptr<const Eigen::MatrixXd> X_;
  std::shared_ptr<const Eigen::VectorXd> y_;
  std::vector<int> active_;   // sorted row indices included in the sum
  Eigen::VectorXd mask_;      // 1.0 on active rows, 0.0 elsewhere
};

struct FitResult {
  Eigen::VectorXd beta;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // value at each accepted iterate
};

// 1e-10 * sqrt(p): tight enough that retrain error is negligible against
// the removal-approximation errors it gets compared to.
double default_tol_abs(int p);

// Cholesky solve of an SPD system; retries once with diagonal jitter
// 1e-12 * trace/p before giving up with NumericalError.
Eigen::VectorXd spd_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& rhs);

// Damped Newton with Armijo backtracking until ||grad|| <= tol_abs or
// max_iter. Non-convergence is reported through the flag, never thrown.
FitResult fit(const Objective& obj, const Eigen::VectorXd& init, double tol_abs,
              int max_iter = 100);
// Zero start, default tolerance.
FitResult fit(const Objective& obj);

// Undamped Newton refinement of an already-converged iterate, run until the
// step norm saturates (<= 1e-14 * max(1, ||beta||)) or stops shrinking.
// Gradient-norm stopping rules bottom out near 1e-12 at these scales; the
// iterates themselves keep contracting quadratically a few digits further,
// which matters when measuring two-step removal errors.
Eigen::VectorXd newton_polish(const Objective& obj, Eigen::VectorXd beta,
                              int max_steps = 6);

}  // namespace unlearn
