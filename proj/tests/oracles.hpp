#pragma once

// Test-only oracles, independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Regularized lower incomplete gamma P(a, x); series + continued fraction.
inline double gammp(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gammp: bad arguments");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Lentz continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// Kolmogorov-Smirnov distance between samples and a CDF.
inline double ks_distance(std::vector<double> samples,
                          const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

// Exact minimizer of sum_i (y_i - x_i'b)^2/2 + lambda ||b||^2 over the rows
// in `rows` (all rows when empty).
inline Eigen::VectorXd ridge_solution(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      double lambda, std::vector<int> rows = {}) {
  if (rows.empty()) {
    rows.resize(static_cast<std::size_t>(X.rows()));
    for (int i = 0; i < X.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  }
  const auto p = X.cols();
  Eigen::MatrixXd G = 2.0 * lambda * Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  for (int i : rows) {
    G += X.row(i).transpose() * X.row(i);
    rhs += y[i] * X.row(i).transpose();
  }
  return G.ldlt().solve(rhs);
}

// Long-run gradient descent on the logistic ridge objective.
inline Eigen::VectorXd logistic_gd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   double lambda, long iters, double lr) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(X.cols());
  for (long k = 0; k < iters; ++k) {
    Eigen::VectorXd g = 2.0 * lambda * b;
    const Eigen::VectorXd z = X * b;
    for (int i = 0; i < X.rows(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-z[i]));
      g += (s - y[i]) * X.row(i).transpose();
    }
    b -= lr * g;
  }
  return b;
}

}  // namespace oracles
