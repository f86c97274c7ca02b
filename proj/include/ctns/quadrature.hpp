#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace ctns {

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Quadrature rule on the reference triangle in barycentric coordinates.
/// Weights include the reference measure, so they sum to 1/2; integrating
/// f over a physical triangle K is 2*|K| * sum_q w_q f(x(bary_q)).
struct QuadratureRule {
  std::vector<Eigen::Vector3d> points;  // barycentric
  std::vector<double> weights;
  int degree = 0;  // declared exactness

  int size() const { return static_cast<int>(points.size()); }
};

/// Classic symmetric rules of exactness degree 1, 2, 3 or 5.
/// Degree 3 is the 4-point rule with a negative centroid weight; degrees
/// 1, 2 and 5 have positive weights only.
QuadratureRule triangle_quadrature(int degree);

/// Tensor Gauss-Legendre rule collapsed onto the triangle (Duffy map),
/// exact for polynomials of total degree >= `degree`. Positive weights for
/// any degree; used where the symmetric rules stop (bubble-rich integrands
/// and test oracles).
QuadratureRule collapsed_gauss_rule(int degree);

}  // namespace ctns
