#include "unlearn/glm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace unlearn {

namespace {

void check_finite(double y, double z) {
  if (!std::isfinite(y) || !std::isfinite(z)) {
    throw std::invalid_argument("loss: non-finite input");
  }
}

void check_binary(double y) {
  if (y != 0.0 && y != 1.0) {
    throw std::invalid_argument("logistic loss: response must be 0 or 1, got " +
                                std::to_string(y));
  }
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double loss_value(LossKind kind, double y, double z) {
  check_finite(y, z);
  switch (kind) {
    case LossKind::squared: {
      const double d = y - z;
      return 0.5 * d * d;
    }
    case LossKind::logistic:
      check_binary(y);
      return y * softplus(-z) + (1.0 - y) * softplus(z);
  }
  throw std::invalid_argument("loss_value: unknown loss kind");
}

LossDerivatives loss_d123(LossKind kind, double y, double z) {
  check_finite(y, z);
  switch (kind) {
    case LossKind::squared:
      return {z - y, 1.0, 0.0};
    case LossKind::logistic: {
      check_binary(y);
      const double s = sigmoid(z);
      const double w = s * (1.0 - s);
      return {s - y, w, w * (1.0 - 2.0 * s)};
    }
  }
  throw std::invalid_argument("loss_d123: unknown loss kind");
}

void Regularizer::validate() const {
  if (kind != RegKind::ridge) throw std::invalid_argument("regularizer: unknown kind");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("regularizer: lambda must be positive and finite");
  }
  if (!(nu > 0.0) || nu > 2.0) {
    throw std::invalid_argument("regularizer: need 0 < nu <= 2 for ridge");
  }
}

double reg_value(const Regularizer& reg, const Eigen::VectorXd& beta) {
  reg.validate();
  if (!beta.allFinite()) throw std::invalid_argument("reg_value: non-finite beta");
  return beta.squaredNorm();
}

RegGradHess reg_grad_hess(const Regularizer& reg, const Eigen::VectorXd& beta) {
  reg.validate();
  if (!beta.allFinite()) throw std::invalid_argument("reg_grad_hess: non-finite beta");
  return {2.0 * beta, Eigen::VectorXd::Constant(beta.size(), 2.0)};
}

const char* loss_name(LossKind kind) {
  return kind == LossKind::squared ? "squared" : "logistic";
}

LossKind loss_from_name(const std::string& name) {
  if (name == "squared") return LossKind::squared;
  if (name == "logistic") return LossKind::logistic;
  throw std::invalid_argument("unknown loss family: " + name);
}

}  // namespace unlearn
