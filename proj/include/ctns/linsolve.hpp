#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <memory>
#include <optional>
#include <stdexcept>

#include "ctns/assembly.hpp"

namespace ctns {

struct ConstraintError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver did not reach the requested residual; carries what it achieved.
struct SolverFailure : std::runtime_error {
  double residual;
  SolverFailure(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
};

/// Sparse system with Dirichlet-type constraints to be eliminated
/// symmetrically before solving.
struct LinearSystem {
  SparseMatrix A;
  Vector b;
  std::vector<DirichletConstraint> constraints;
};

/// Eliminates constrained rows/columns in place (identity row, zeroed
/// column, RHS corrected by the prescribed values). The sparsity pattern is
/// preserved with explicit zeros. Duplicate constraints must agree in value.
LinearSystem apply_constraints(LinearSystem sys);

/// Direct sparse solve (LU with partial pivoting) of the constrained system,
/// with iterative refinement. Guarantees |b - A x|_2 <= tol |b|_2 on return,
/// throws SolverFailure or SingularityError otherwise.
Vector solve(const LinearSystem& sys, double tol = 1e-10, int max_iter = 3);

/// Reusable LU factorization: the symbolic analysis is kept across
/// factorizations while the sparsity pattern is unchanged.
class SparseLuSolver {
 public:
  SparseLuSolver();
  ~SparseLuSolver();
  SparseLuSolver(SparseLuSolver&&) noexcept;
  SparseLuSolver& operator=(SparseLuSolver&&) noexcept;

  void factorize(const SparseMatrix& A);
  Vector solve(const Vector& b) const;
  bool ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Krylov path behind the same residual contract: BiCGSTAB on A,
/// preconditioned by a factorization of a nearby matrix. Returns the
/// solution once |b - A x|_2 <= tol |b|_2, or nullopt if max_iter
/// iterations were not enough (caller refreshes the factorization).
std::optional<Vector> krylov_solve(const SparseMatrix& A, const SparseLuSolver& precond,
                                   const Vector& b, double tol, int max_iter);

}  // namespace ctns
