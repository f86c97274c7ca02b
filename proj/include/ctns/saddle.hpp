#pragma once

#include <memory>

#include "ctns/fespace.hpp"
#include "ctns/linsolve.hpp"

namespace ctns {

/// Direct solver for the velocity-pressure systems of the scheme,
///   [ mass_coef M + Du K + k B(u_prev)   -D ] [u]   [b_u]
///   [ D^T                                 0 ] [p] = [b_p],
/// closed by the mean-zero multiplier row. Two structural reductions keep
/// the factorizations sparse without touching the discrete problem:
///  - bubble DOFs couple only inside their own element and are eliminated
///    exactly element by element (solutions still carry bubble values via
///    back-substitution);
///  - the multiplier's dense row never enters the factorized matrix: the
///    factorized operator pins one pressure node and the returned pressure
///    is shifted to exact zero mean, which solves the same system because
///    D annihilates constant pressures and the continuity rows sum to zero.
/// Every solve is verified against the full multiplier formulation at the
/// requested tolerance; consecutive solves reuse the last factorization as
/// a Krylov preconditioner while the convection field drifts.
class SaddleSolver {
 public:
  SaddleSolver(const FeSpace& velocity, const FeSpace& pressure, double mass_coef,
               double Du, double k, double tol);
  ~SaddleSolver();
  SaddleSolver(SaddleSolver&&) noexcept;

  struct Result {
    Vector u;  // full velocity vector, bubbles included, constraints exact
    Vector p;  // zero-mean pressure
  };

  /// u_prev: convection field (ignored when k = 0; may be empty then).
  /// b_u: momentum load over all velocity DOFs; b_p: continuity load
  /// (zero inside the time loop, nonzero for the Stokes projection).
  Result solve(const Vector& u_prev, const Vector& b_u, const Vector& b_p);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctns
