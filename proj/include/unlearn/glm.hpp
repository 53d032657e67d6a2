#pragma once

#include <string>

#include <Eigen/Core>

namespace unlearn {

// Loss families, evaluated per observation at the linear predictor z = x'beta.
// A family provides the loss value and its first three derivatives in z;
// the solver and the removal updates consume exactly that contract, so new
// families can be added without touching either.
enum class LossKind { squared, logistic };

struct LossDerivatives {
  double d1;  // dl/dz
  double d2;  // d2l/dz2
  double d3;  // d3l/dz3
};

// squared:  l(y,z) = (y-z)^2 / 2
// logistic: l(y,z) = y*log(1+e^{-z}) + (1-y)*log(1+e^{z}), y in {0,1},
//           computed through softplus so large |z| cannot overflow.
double loss_value(LossKind kind, double y, double z);
LossDerivatives loss_d123(LossKind kind, double y, double z);

// Overflow-safe 1/(1+e^{-z}) and log(1+e^{z}).
double sigmoid(double z);
double softplus(double z);

enum class RegKind { ridge };

// Separable regularizer. For ridge, r(beta) = ||beta||^2 with gradient
// 2*beta and constant Hessian diag(2). nu is the declared strong-convexity
// lower bound used by the theory-side calculators; it is configuration,
// not inferred from the Hessian.
struct Regularizer {
  RegKind kind = RegKind::ridge;
  double lambda = 1.0;
  double nu = 1.0;

  void validate() const;  // lambda > 0, 0 < nu <= 2 for ridge
};

struct RegGradHess {
  Eigen::VectorXd grad;
  Eigen::VectorXd hess_diag;
};

double reg_value(const Regularizer& reg, const Eigen::VectorXd& beta);
RegGradHess reg_grad_hess(const Regularizer& reg, const Eigen::VectorXd& beta);

struct ModelSpec {
  LossKind loss = LossKind::logistic;
  Regularizer reg;

  void validate() const { reg.validate(); }
};

const char* loss_name(LossKind kind);
LossKind loss_from_name(const std::string& name);

}  // namespace unlearn
