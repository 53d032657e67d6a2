#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "unlearn/data.hpp"
#include "unlearn/quadrature.hpp"
#include "unlearn/unlearn.hpp"

using namespace unlearn;

namespace {

ModelSpec spec_of(LossKind loss, double lambda) {
  return ModelSpec{loss, Regularizer{RegKind::ridge, lambda, 1.0}};
}

}  // namespace

TEST_CASE("removal request validation") {
  CHECK_THROWS_AS(RemovalRequest::of({1, 1}, 10), std::invalid_argument);
  CHECK_THROWS_AS(RemovalRequest::of({-1}, 10), std::invalid_argument);
  CHECK_THROWS_AS(RemovalRequest::of({10}, 10), std::invalid_argument);
  CHECK_THROWS_AS(RemovalRequest::of({0, 1, 2}, 3), std::invalid_argument);
  const RemovalRequest req = RemovalRequest::of({5, 2, 9}, 10);
  CHECK(req.indices == std::vector<int>{2, 5, 9});
  CHECK(req.m() == 3);
}

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  const QuadratureRule r8 = gauss_legendre_01(8);
  CHECK(r8.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  // integral of t^k on [0,1] = 1/(k+1), exact up to degree 15
  for (int k = 0; k <= 15; ++k) {
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) acc += r8.weights[i] * std::pow(r8.nodes[i], k);
    CHECK(acc == doctest::Approx(1.0 / (k + 1)).epsilon(1e-12));
  }
  const QuadratureRule r1 = gauss_legendre_01(1);
  CHECK(r1.nodes[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(gauss_legendre_01(0), std::invalid_argument);
}

TEST_CASE("one Newton step is exact on the quadratic objective") {
  RngStream rng(21);
  const int n = 60, p = 20;
  const Dataset ds = generate_linear(n, p, 1.0, rng);
  const Objective obj(spec_of(LossKind::squared, 1.0), ds.X, ds.y);
  const FitResult full = fit(obj);
  REQUIRE(full.converged);

  for (int m : {1, 3, 15}) {
    RngStream pick = rng.substream(static_cast<std::uint64_t>(m));
    const RemovalRequest req = RemovalRequest::random(n, m, pick);
    const Eigen::VectorXd stepped = newton_step(obj.without(req.indices), full.beta);
    std::vector<int> keep;
    for (int i = 0; i < n; ++i) {
      if (std::find(req.indices.begin(), req.indices.end(), i) == req.indices.end()) {
        keep.push_back(i);
      }
    }
    const Eigen::VectorXd direct = oracles::ridge_solution(ds.X, ds.y, 1.0, keep);
    CHECK((stepped - direct).norm() <= 1e-8 * direct.norm());
  }
}

TEST_CASE("empty removal: the optimum is a fixed point") {
  RngStream rng(22);
  const Dataset ds = generate_logistic(50, 12, rng);
  const double lambda = 1.0, nu = 1.0;
  const Objective obj(spec_of(LossKind::logistic, lambda), ds.X, ds.y);
  const FitResult full = fit(obj);
  REQUIRE(full.converged);
  const Eigen::VectorXd stepped = newton_step(obj, full.beta);
  CHECK((stepped - full.beta).norm() <= default_tol_abs(12) / (lambda * nu));
}

TEST_CASE("one logistic step strictly improves on the starting point") {
  RngStream rng(23);
  const Dataset ds = generate_logistic(80, 30, rng);
  const Objective obj(spec_of(LossKind::logistic, 1.0), ds.X, ds.y);
  const FitResult full = fit(obj);
  REQUIRE(full.converged);
  RngStream pick = rng.substream(1);
  const RemovalRequest req = RemovalRequest::random(80, 2, pick);
  const Objective wo = obj.without(req.indices);
  const FitResult exact = fit(wo, full.beta, default_tol_abs(30));
  REQUIRE(exact.converged);
  const Eigen::VectorXd stepped = newton_step(wo, full.beta);
  CHECK((stepped - exact.beta).norm() < (full.beta - exact.beta).norm());
}

TEST_CASE("unlearn records iterates and adds noise exactly once") {
  RngStream rng(24);
  const Dataset ds = generate_logistic(40, 10, rng);
  const Objective obj(spec_of(LossKind::logistic, 1.0), ds.X, ds.y);
  const FitResult full = fit(obj);
  RngStream pick = rng.substream(1);
  const RemovalRequest req = RemovalRequest::random(40, 3, pick);

  SUBCASE("T=0, r=0 is the identity pipeline") {
    RngStream noise = rng.substream(2);
    const UnlearnResult res = unlearn::unlearn(obj, full.beta, req, 0, 0.0, 1.0, noise);
    CHECK(res.iterates.size() == 1);
    CHECK((res.perturbed - full.beta).norm() == 0.0);
    CHECK(res.noise.norm() == 0.0);
  }

  SUBCASE("iterates[0] is the supplied optimum; perturbed = last + noise") {
    RngStream noise = rng.substream(3);
    const UnlearnResult res = unlearn::unlearn(obj, full.beta, req, 3, 0.05, 1.0, noise);
    CHECK(res.iterates.size() == 4);
    CHECK((res.iterates[0] - full.beta).norm() == 0.0);
    CHECK((res.perturbed - (res.iterates[3] + res.noise)).norm() == 0.0);
    CHECK(res.scale_used == 0.05);
    CHECK(res.noise.norm() > 0.0);
  }

  SUBCASE("noise draw depends only on (p, r, eps, seed), not on data") {
    RngStream n1 = rng.substream(4), n2 = rng.substream(4);
    const UnlearnResult r1 = unlearn::unlearn(obj, full.beta, req, 1, 0.2, 1.0, n1);
    Dataset other = generate_logistic(40, 10, rng);
    const Objective obj2(spec_of(LossKind::logistic, 1.0), other.X, other.y);
    const FitResult full2 = fit(obj2);
    const UnlearnResult r2 = unlearn::unlearn(obj2, full2.beta, req, 1, 0.2, 1.0, n2);
    CHECK((r1.noise - r2.noise).norm() == 0.0);
  }
}

TEST_CASE("two steps are idempotent on the quadratic objective") {
  RngStream rng(25);
  const Dataset ds = generate_linear(50, 15, 1.0, rng);
  const Objective obj(spec_of(LossKind::squared, 1.0), ds.X, ds.y);
  const FitResult full = fit(obj);
  RngStream pick = rng.substream(1), noise = rng.substream(2);
  const RemovalRequest req = RemovalRequest::random(50, 4, pick);
  const UnlearnResult res = unlearn::unlearn(obj, full.beta, req, 2, 0.0, 1.0, noise);
  CHECK((res.iterates[2] - res.iterates[1]).norm() <= 1e-10 * res.iterates[1].norm());
}

TEST_CASE("quadratic convergence: contraction ratio bounded by the Hessian Lipschitz bound") {
  RngStream rng(26);
  const int n = 80, p = 80;
  const Dataset ds = generate_logistic(n, p, rng);
  const double lambda = 1.0, nu = 1.0;
  const Objective obj(spec_of(LossKind::logistic, lambda), ds.X, ds.y);
  const FitResult full = fit(obj);
  REQUIRE(full.converged);
  RngStream pick = rng.substream(1), noise = rng.substream(2);
  const RemovalRequest req = RemovalRequest::random(n, 2, pick);
  const Objective wo = obj.without(req.indices);
  const UnlearnResult res = unlearn::unlearn(obj, full.beta, req, 3, 0.0, 1.0, noise);
  const Eigen::VectorXd exact = newton_polish(wo, fit(wo, res.iterates[3], 1e-12).beta);

  // ||G(b1)-G(b2)|| <= ||X||^2 * max_i ||x_i|| * sup|l'''| * ||b1-b2||;
  // sup over z of |l'''| for the logistic family is 1/(6 sqrt(3)).
  double max_row = 0.0;
  for (int i = 0; i < n; ++i) max_row = std::max(max_row, ds.X.row(i).norm());
  const double x_op = ds.X.jacobiSvd().singularValues()[0];
  const double lipschitz = x_op * x_op * max_row / (6.0 * std::sqrt(3.0));
  const double contraction = lipschitz / (2.0 * lambda * nu);

  double prev = (res.iterates[1] - exact).norm();
  for (int t = 2; t <= 3; ++t) {
    const double cur = (res.iterates[t] - exact).norm();
    if (cur < 1e-13) break;  // saturated at the accuracy of the retrain
    CHECK(cur <= contraction * prev * prev * 1.05 + 1e-13);
    prev = cur;
  }
}

TEST_CASE("removal error shrinks monotonically in t") {
  RngStream rng(27);
  const int n = 70, p = 25;
  const Dataset ds = generate_logistic(n, p, rng);
  const Objective obj(spec_of(LossKind::logistic, 0.5), ds.X, ds.y);
  const FitResult full = fit(obj);
  RngStream pick = rng.substream(1), noise = rng.substream(2);
  const RemovalRequest req = RemovalRequest::random(n, 3, pick);
  const Objective wo = obj.without(req.indices);
  const UnlearnResult res = unlearn::unlearn(obj, full.beta, req, 4, 0.0, 1.0, noise);
  const Eigen::VectorXd exact = newton_polish(wo, fit(wo, res.iterates[4], 1e-12).beta);
  double prev = (res.iterates[0] - exact).norm();
  for (int t = 1; t <= 4; ++t) {
    const double cur = (res.iterates[t] - exact).norm();
    CHECK(cur <= prev + 1e-14);
    prev = cur;
  }
}

TEST_CASE("minimum step rule") {
  CHECK(min_newton_steps(1, 1000) == 2);
  CHECK(min_newton_steps(0, 1000) == 2);  // alpha = 0 gives T = 1, next integer is 2
  CHECK(min_newton_steps(3, 100000) == 2);
  CHECK_THROWS_AS(min_newton_steps(9, 1000), std::domain_error);   // alpha > 1/3
  CHECK_THROWS_AS(min_newton_steps(99, 1000), std::domain_error);
  // alpha just below 1/3 demands many steps
  CHECK(min_newton_steps(8, 1000) >= 4);
}

TEST_CASE("leave-M-out identity: constant Hessian makes it exact") {
  RngStream rng(28);
  const int n = 40, p = 12;
  const Dataset ds = generate_linear(n, p, 1.0, rng);
  const Objective obj(spec_of(LossKind::squared, 1.0), ds.X, ds.y);
  const FitResult full = fit(obj);
  RngStream pick = rng.substream(1);
  const RemovalRequest req = RemovalRequest::random(n, 3, pick);
  const FitResult wo = fit(obj.without(req.indices), full.beta, default_tol_abs(p));
  REQUIRE(wo.converged);
  for (int q : {1, 4, 64}) {
    CHECK(exact_loo_identity_residual(obj, full.beta, wo.beta, req, q) <=
          1e-9 * full.beta.norm());
  }
}

TEST_CASE("leave-M-out identity on the logistic model") {
  RngStream rng(29);
  const int n = 100, p = 100;
  const Dataset ds = generate_logistic(n, p, rng);
  const Objective obj(spec_of(LossKind::logistic, 1.0), ds.X, ds.y);
  const FitResult full = fit(obj);
  RngStream pick = rng.substream(1);
  const RemovalRequest req = RemovalRequest::random(n, 1, pick);
  const FitResult wo = fit(obj.without(req.indices), full.beta, default_tol_abs(p));
  REQUIRE(wo.converged);
  const double gap = (full.beta - wo.beta).norm();
  CHECK(exact_loo_identity_residual(obj, full.beta, wo.beta, req, 64) <= 1e-6 * gap);

  // empty removal: both sides of the identity vanish
  const RemovalRequest none = RemovalRequest::of({}, n);
  CHECK(exact_loo_identity_residual(obj, full.beta, full.beta, none, 8) == 0.0);

  CHECK_THROWS_AS(exact_loo_identity_residual(obj, full.beta, wo.beta, req, 0),
                  std::invalid_argument);
}
