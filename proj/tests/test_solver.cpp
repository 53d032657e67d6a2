#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "unlearn/data.hpp"
#include "unlearn/errors.hpp"
#include "unlearn/solver.hpp"

using namespace unlearn;

namespace {

ModelSpec spec_of(LossKind loss, double lambda) {
  return ModelSpec{loss, Regularizer{RegKind::ridge, lambda, 1.0}};
}

}  // namespace

TEST_CASE("objective value: loss term vanishes on a zero design") {
  const int n = 10, p = 4;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, p);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  const Objective obj(spec_of(LossKind::squared, 0.7), X, y);
  RngStream rng(1);
  const Eigen::VectorXd beta = rng.gaussian_vector(p);
  CHECK(obj.value(beta) == doctest::Approx(0.7 * beta.squaredNorm()));
}

TEST_CASE("objective value: logistic at zero is n log 2") {
  RngStream rng(2);
  const Dataset ds = generate_logistic(40, 6, rng);
  const Objective obj(spec_of(LossKind::logistic, 1.0), ds.X, ds.y);
  CHECK(obj.value(Eigen::VectorXd::Zero(6)) == doctest::Approx(40.0 * std::log(2.0)));
  const Objective wo = obj.without({0, 3, 7});
  CHECK(wo.value(Eigen::VectorXd::Zero(6)) == doctest::Approx(37.0 * std::log(2.0)));
}

TEST_CASE("removing rows subtracts exactly their losses") {
  RngStream rng(3);
  const Dataset ds = generate_logistic(30, 5, rng);
  const Objective obj(spec_of(LossKind::logistic, 0.5), ds.X, ds.y);
  const Eigen::VectorXd beta = rng.gaussian_vector(5);
  const std::vector<int> M{2, 11, 29};
  double removed = 0.0;
  for (int i : M) removed += loss_value(LossKind::logistic, ds.y[i], ds.X.row(i).dot(beta));
  CHECK(obj.without(M).value(beta) == doctest::Approx(obj.value(beta) - removed));
}

TEST_CASE("gradient matches the squared-ridge closed form") {
  RngStream rng(4);
  const Dataset ds = generate_linear(25, 7, 1.0, rng);
  const Objective obj(spec_of(LossKind::squared, 0.9), ds.X, ds.y);
  const Eigen::VectorXd beta = rng.gaussian_vector(7);
  const Eigen::VectorXd expected =
      ds.X.transpose() * (ds.X * beta - ds.y) + 2.0 * 0.9 * beta;
  CHECK((obj.gradient(beta) - expected).norm() <= 1e-12 * std::max(1.0, expected.norm()));
}

TEST_CASE("gradient matches finite differences of the objective") {
  RngStream rng(5);
  const Dataset ds = generate_logistic(20, 4, rng);
  const Objective obj(spec_of(LossKind::logistic, 0.3), ds.X, ds.y);
  const Eigen::VectorXd beta = rng.gaussian_vector(4);
  const Eigen::VectorXd g = obj.gradient(beta);
  for (int j = 0; j < 4; ++j) {
    const double fd = oracles::central_diff(
        [&](double t) {
          Eigen::VectorXd b = beta;
          b[j] = t;
          return obj.value(b);
        },
        beta[j], 1e-6);
    CHECK(std::abs(fd - g[j]) <= 1e-5 * std::max(1.0, std::abs(g[j])));
  }
}

TEST_CASE("hessian: squared-ridge closed form and logistic at zero margins") {
  RngStream rng(6);
  const Dataset ds = generate_linear(15, 5, 1.0, rng);
  const double lambda = 0.4;
  {
    const Objective obj(spec_of(LossKind::squared, lambda), ds.X, ds.y);
    const Eigen::MatrixXd expected =
        ds.X.transpose() * ds.X +
        2.0 * lambda * Eigen::MatrixXd::Identity(5, 5);
    CHECK((obj.hessian(rng.gaussian_vector(5)) - expected).norm() <= 1e-12);
  }
  {
    Eigen::VectorXd y01 = (ds.y.array() > 0).cast<double>();
    const Objective obj(spec_of(LossKind::logistic, lambda), ds.X, y01);
    const Eigen::MatrixXd expected =
        0.25 * ds.X.transpose() * ds.X +
        2.0 * lambda * Eigen::MatrixXd::Identity(5, 5);
    CHECK((obj.hessian(Eigen::VectorXd::Zero(5)) - expected).norm() <= 1e-12);
  }
}

TEST_CASE("hessian is SPD: Cholesky succeeds on random instances") {
  RngStream rng(7);
  for (int k = 0; k < 5; ++k) {
    const Dataset ds = generate_logistic(30, 8, rng);
    const Objective obj(spec_of(LossKind::logistic, 0.05), ds.X, ds.y);
    const Eigen::MatrixXd G = obj.hessian(rng.gaussian_vector(8));
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    CHECK(llt.info() == Eigen::Success);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
    CHECK(eig.eigenvalues().minCoeff() >= 2.0 * 0.05 - 1e-12);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  RngStream rng(8);
  const Dataset ds = generate_logistic(10, 3, rng);
  const Objective obj(spec_of(LossKind::logistic, 1.0), ds.X, ds.y);
  const Eigen::VectorXd bad = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(obj.value(bad), std::invalid_argument);
  CHECK_THROWS_AS(obj.gradient(bad), std::invalid_argument);
  CHECK_THROWS_AS(obj.hessian(bad), std::invalid_argument);
  CHECK_THROWS_AS(obj.without({10}), std::invalid_argument);
}

TEST_CASE("fit matches the ridge linear-system solution") {
  RngStream rng(9);
  const Dataset ds = generate_linear(60, 20, 1.0, rng);
  const Objective obj(spec_of(LossKind::squared, 1.0), ds.X, ds.y);
  const FitResult res = fit(obj);
  REQUIRE(res.converged);
  const Eigen::VectorXd direct = oracles::ridge_solution(ds.X, ds.y, 1.0);
  CHECK((res.beta - direct).norm() <= 1e-10 * direct.norm());
}

TEST_CASE("fit of an all-zero response is zero") {
  RngStream rng(10);
  Dataset ds = generate_linear(30, 6, 1.0, rng);
  ds.y.setZero();
  const Objective obj(spec_of(LossKind::squared, 0.8), ds.X, ds.y);
  const FitResult res = fit(obj);
  REQUIRE(res.converged);
  CHECK(res.beta.norm() <= 1e-10);
  CHECK(res.iterations <= 1);
}

TEST_CASE("small logistic fit matches a long-run gradient-descent oracle") {
  Eigen::MatrixXd X(6, 2);
  X << 0.8, -0.4, -0.2, 0.6, 0.5, 0.5, -0.7, -0.1, 0.3, -0.9, -0.5, 0.2;
  Eigen::VectorXd y(6);
  y << 1, 0, 1, 0, 1, 0;
  const Objective obj(spec_of(LossKind::logistic, 0.5), X, y);
  const FitResult res = fit(obj);
  REQUIRE(res.converged);
  const Eigen::VectorXd gd = oracles::logistic_gd(X, y, 0.5, 1000000, 1e-3);
  CHECK((res.beta - gd).norm() <= 1e-6);
}

TEST_CASE("descent, optimality residual, and uniqueness") {
  RngStream rng(11);
  const Dataset ds = generate_logistic(80, 25, rng);
  const double lambda = 1.0, nu = 1.0;
  const Objective obj(spec_of(LossKind::logistic, lambda), ds.X, ds.y);
  const double tol = default_tol_abs(25);

  const FitResult a = fit(obj, Eigen::VectorXd::Zero(25), tol);
  REQUIRE(a.converged);
  CHECK(a.grad_norm <= tol);
  for (std::size_t k = 1; k < a.objective_trace.size(); ++k) {
    CHECK(a.objective_trace[k] <= a.objective_trace[k - 1] + 1e-12);
  }

  const FitResult b = fit(obj, 5.0 * rng.gaussian_vector(25), tol);
  REQUIRE(b.converged);
  CHECK((a.beta - b.beta).norm() <= 10.0 * tol / (lambda * nu));
}

TEST_CASE("leave-empty-out fit equals the full fit") {
  RngStream rng(12);
  const Dataset ds = generate_logistic(40, 10, rng);
  const Objective obj(spec_of(LossKind::logistic, 1.0), ds.X, ds.y);
  const FitResult full = fit(obj);
  const FitResult wo = fit(obj.without({}));
  REQUIRE(full.converged);
  REQUIRE(wo.converged);
  CHECK((full.beta - wo.beta).norm() == 0.0);
}

TEST_CASE("non-convergence is reported through the flag") {
  RngStream rng(13);
  const Dataset ds = generate_logistic(50, 12, rng);
  const Objective obj(spec_of(LossKind::logistic, 1.0), ds.X, ds.y);
  const FitResult res = fit(obj, Eigen::VectorXd::Zero(12), 1e-30, 2);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 2);
}

TEST_CASE("spd_solve applies jitter before failing") {
  Eigen::MatrixXd G = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd rhs(3);
  rhs << 1, 2, 3;
  CHECK((spd_solve(G, rhs) - rhs).norm() <= 1e-14);
  Eigen::MatrixXd indef = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(spd_solve(indef, rhs), NumericalError);
}

TEST_CASE("newton_polish refines past the gradient tolerance") {
  RngStream rng(14);
  const Dataset ds = generate_logistic(60, 15, rng);
  const Objective obj(spec_of(LossKind::logistic, 1.0), ds.X, ds.y);
  const FitResult coarse = fit(obj, Eigen::VectorXd::Zero(15), 1e-6);
  REQUIRE(coarse.converged);
  const Eigen::VectorXd polished = newton_polish(obj, coarse.beta);
  CHECK(obj.gradient(polished).norm() < obj.gradient(coarse.beta).norm());
}
