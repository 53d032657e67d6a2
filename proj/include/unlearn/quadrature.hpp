#pragma once

#include <Eigen/Core>

namespace unlearn {

struct QuadratureRule {
  Eigen::VectorXd nodes;    // ascending in (0,1)
  Eigen::VectorXd weights;  // sum to 1
};

// Gauss-Legendre rule transplanted to [0,1]; exact for polynomials of
// degree <= 2q-1, spectrally accurate for smooth integrands.
QuadratureRule gauss_legendre_01(int q);

}  // namespace unlearn
