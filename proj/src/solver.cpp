#include "unlearn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "unlearn/errors.hpp"

namespace unlearn {

Objective::Objective(ModelSpec spec, Eigen::MatrixXd X, Eigen::VectorXd y)
    : spec_(spec),
      X_(std::make_shared<const Eigen::MatrixXd>(std::move(X))),
      y_(std::make_shared<const Eigen::VectorXd>(std::move(y))) {
  spec_.validate();
  if (X_->rows() != y_->size()) {
    throw std::invalid_argument("objective: X rows and y length differ");
  }
  if (X_->rows() < 1) throw std::invalid_argument("objective: empty dataset");
  if (!X_->allFinite() || !y_->allFinite()) {
    throw std::invalid_argument("objective: non-finite data");
  }
  active_.resize(static_cast<std::size_t>(n()));
  for (int i = 0; i < n(); ++i) active_[static_cast<std::size_t>(i)] = i;
  mask_ = Eigen::VectorXd::Ones(n());
}

Objective Objective::without(const std::vector<int>& removed) const {
  Objective out;
  out.spec_ = spec_;
  out.X_ = X_;
  out.y_ = y_;
  out.mask_ = mask_;
  for (int i : removed) {
    if (i < 0 || i >= n()) throw std::invalid_argument("without: row index out of range");
    out.mask_[i] = 0.0;
  }
  out.active_.reserve(active_.size());
  for (int i : active_) {
    if (out.mask_[i] != 0.0) out.active_.push_back(i);
  }
  if (out.active_.empty()) {
    throw std::invalid_argument("without: removal leaves no active rows");
  }
  return out;
}

void Objective::check_dim(const Eigen::VectorXd& beta) const {
  if (beta.size() != p()) {
    throw std::invalid_argument("objective: beta has dimension " +
                                std::to_string(beta.size()) + ", expected " +
                                std::to_string(p()));
  }
}

double Objective::value(const Eigen::VectorXd& beta) const {
  check_dim(beta);
  const Eigen::VectorXd z = (*X_) * beta;
  double total = 0.0;
  for (int i : active_) total += loss_value(spec_.loss, (*y_)[i], z[i]);
  return total + spec_.reg.lambda * reg_value(spec_.reg, beta);
}

Eigen::VectorXd Objective::gradient(const Eigen::VectorXd& beta) const {
  check_dim(beta);
  const Eigen::VectorXd z = (*X_) * beta;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n());
  for (int i : active_) w[i] = loss_d123(spec_.loss, (*y_)[i], z[i]).d1;
  const RegGradHess rg = reg_grad_hess(spec_.reg, beta);
  return X_->transpose() * w + spec_.reg.lambda * rg.grad;
}

Eigen::MatrixXd Objective::hessian(const Eigen::VectorXd& beta) const {
  check_dim(beta);
  const Eigen::VectorXd z = (*X_) * beta;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n());
  for (int i : active_) d[i] = loss_d123(spec_.loss, (*y_)[i], z[i]).d2;
  // d >= 0 for convex losses, so X' diag(d) X = W'W with W = sqrt(d) X.
  const Eigen::MatrixXd W = d.cwiseSqrt().asDiagonal() * (*X_);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(p(), p());
  G.selfadjointView<Eigen::Lower>().rankUpdate(W.transpose());
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  const RegGradHess rg = reg_grad_hess(spec_.reg, beta);
  G.diagonal() += spec_.reg.lambda * rg.hess_diag;
  return G;
}

double default_tol_abs(int p) { return 1e-10 * std::sqrt(static_cast<double>(p)); }

Eigen::VectorXd spd_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  const double jitter = 1e-12 * G.trace() / static_cast<double>(G.rows());
  Eigen::MatrixXd Gj = G;
  Gj.diagonal().array() += jitter;
  llt.compute(Gj);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  throw NumericalError("spd_solve: Cholesky factorization failed even with jitter");
}

FitResult fit(const Objective& obj, const Eigen::VectorXd& init, double tol_abs,
              int max_iter) {
  if (!(tol_abs > 0.0)) throw std::invalid_argument("fit: tol_abs must be positive");
  if (init.size() != obj.p()) throw std::invalid_argument("fit: init has wrong dimension");

  constexpr double kArmijo = 1e-4;
  constexpr double kShrink = 0.5;

  FitResult res;
  res.beta = init;
  double f = obj.value(res.beta);
  res.objective_trace.push_back(f);

  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = obj.gradient(res.beta);
    res.grad_norm = g.norm();
    if (res.grad_norm <= tol_abs) {
      res.converged = true;
      return res;
    }
    res.iterations = it + 1;
    const Eigen::VectorXd dir = spd_solve(obj.hessian(res.beta), -g);
    const double slope = g.dot(dir);  // < 0 for an SPD system

    // Near the optimum the predicted decrease drops below the resolution of
    // f itself; the epsilon slack lets the full Newton step through there.
    const double f_slack =
        4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    while (step > 1e-18) {
      f_new = obj.value(res.beta + step * dir);
      if (std::isfinite(f_new) && f_new <= f + kArmijo * step * slope + f_slack) break;
      step *= kShrink;
    }
    if (step <= 1e-18) break;  // line search stalled; report non-convergence

    res.beta += step * dir;
    f = f_new;
    res.objective_trace.push_back(f);
  }

  res.grad_norm = obj.gradient(res.beta).norm();
  res.converged = res.grad_norm <= tol_abs;
  return res;
}

FitResult fit(const Objective& obj) {
  return fit(obj, Eigen::VectorXd::Zero(obj.p()), default_tol_abs(obj.p()));
}

Eigen::VectorXd newton_polish(const Objective& obj, Eigen::VectorXd beta, int max_steps) {
  double prev_step = std::numeric_limits<double>::infinity();
  for (int k = 0; k < max_steps; ++k) {
    const Eigen::VectorXd dir = spd_solve(obj.hessian(beta), -obj.gradient(beta));
    const double step = dir.norm();
    beta += dir;
    if (step <= 1e-14 * std::max(1.0, beta.norm()) || step >= prev_step) break;
    prev_step = step;
  }
  return beta;
}

}  // namespace unlearn
