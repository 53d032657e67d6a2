#include "unlearn/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace unlearn {

QuadratureRule gauss_legendre_01(int q) {
  if (q < 1) throw std::invalid_argument("gauss_legendre_01: need q >= 1");
  Eigen::VectorXd x(q), w(q);
  const int mid = (q + 1) / 2;
  for (int i = 0; i < mid; ++i) {
    // Chebyshev-like initial guess, then Newton on P_q(z) = 0.
    double z = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < q; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = q * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[q - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[q - 1 - i] = w[i];
  }
  // Map [-1,1] -> [0,1].
  QuadratureRule rule;
  rule.nodes = (x.array() + 1.0) / 2.0;
  rule.weights = w / 2.0;
  return rule;
}

}  // namespace unlearn
