#include "ctns/linsolve.hpp"

#include <algorithm>
#include <cmath>

namespace ctns {

LinearSystem apply_constraints(LinearSystem sys) {
  if (sys.constraints.empty()) return sys;
  const int n = static_cast<int>(sys.A.rows());

  std::vector<char> fixed(n, 0);
  std::vector<double> value(n, 0.0);
  for (const auto& c : sys.constraints) {
    if (c.dof < 0 || c.dof >= n) throw ConstraintError("constraint dof out of range");
    if (fixed[c.dof] && value[c.dof] != c.value) {
      throw ConstraintError("conflicting values for constrained dof " +
                            std::to_string(c.dof));
    }
    fixed[c.dof] = 1;
    value[c.dof] = c.value;
  }

  sys.A.makeCompressed();
  for (int i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(sys.A, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (fixed[i]) {
        it.valueRef() = (j == i) ? 1.0 : 0.0;
      } else if (fixed[j]) {
        sys.b[i] -= it.value() * value[j];
        it.valueRef() = 0.0;
      }
    }
    if (fixed[i]) sys.b[i] = value[i];
  }
  // Diagonal must be present for the identity row; rectangular meshes always
  // assemble it, so a missing one means a malformed system.
  for (const auto& c : sys.constraints) {
    if (sys.A.coeff(c.dof, c.dof) != 1.0) {
      throw ConstraintError("constrained dof has no diagonal entry");
    }
  }
  return sys;
}

struct SparseLuSolver::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  Eigen::Index rows = -1;
  Eigen::Index nnz = -1;
  bool analyzed = false;
  bool factorized = false;
};

SparseLuSolver::SparseLuSolver() : impl_(std::make_unique<Impl>()) {}
SparseLuSolver::~SparseLuSolver() = default;
SparseLuSolver::SparseLuSolver(SparseLuSolver&&) noexcept = default;
SparseLuSolver& SparseLuSolver::operator=(SparseLuSolver&&) noexcept = default;

void SparseLuSolver::factorize(const SparseMatrix& A) {
  Eigen::SparseMatrix<double> col_major = A;  // LU wants column storage
  col_major.makeCompressed();
  if (!impl_->analyzed || impl_->rows != A.rows() || impl_->nnz != A.nonZeros()) {
    impl_->lu.analyzePattern(col_major);
    impl_->analyzed = true;
    impl_->rows = A.rows();
    impl_->nnz = A.nonZeros();
  }
  impl_->lu.factorize(col_major);
  if (impl_->lu.info() != Eigen::Success) {
    impl_->factorized = false;
    throw SingularityError("sparse LU factorization failed (structurally or "
                           "numerically singular matrix)");
  }
  impl_->factorized = true;
}

Vector SparseLuSolver::solve(const Vector& b) const {
  if (!impl_->factorized) throw SingularityError("solve called before factorize");
  return impl_->lu.solve(b);
}

bool SparseLuSolver::ready() const { return impl_->factorized; }

Vector solve(const LinearSystem& sys, double tol, int max_iter) {
  if (sys.A.rows() != sys.A.cols()) {
    throw SingularityError("solve: system matrix is not square");
  }
  const LinearSystem reduced = apply_constraints(sys);

  SparseLuSolver lu;
  lu.factorize(reduced.A);
  Vector x = lu.solve(reduced.b);

  const double bnorm = reduced.b.norm();
  double res = (reduced.b - reduced.A * x).norm();
  for (int it = 0; it < max_iter && res > tol * bnorm; ++it) {
    x += lu.solve(reduced.b - reduced.A * x);
    res = (reduced.b - reduced.A * x).norm();
  }
  if (res > tol * bnorm) {
    throw SolverFailure("direct solve did not meet the residual tolerance", res);
  }
  return x;
}

std::optional<Vector> krylov_solve(const SparseMatrix& A, const SparseLuSolver& precond,
                                   const Vector& b, double tol, int max_iter) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  const double target = tol * bnorm;

  Vector x = precond.solve(b);
  Vector r = b - A * x;
  if (r.norm() <= target) return x;

  // Preconditioned BiCGSTAB (van der Vorst), true-residual verified on exit.
  const Vector rhat = r;
  double rho_old = 1.0, alpha = 1.0, omega = 1.0;
  Vector v = Vector::Zero(b.size()), p = Vector::Zero(b.size());
  const double tiny = 1e-300;

  for (int i = 0; i < max_iter; ++i) {
    const double rho = rhat.dot(r);
    if (std::abs(rho) < tiny) return std::nullopt;
    if (i == 0) {
      p = r;
    } else {
      const double beta = (rho / rho_old) * (alpha / omega);
      p = r + beta * (p - omega * v);
    }
    const Vector phat = precond.solve(p);
    v = A * phat;
    const double rv = rhat.dot(v);
    if (std::abs(rv) < tiny) return std::nullopt;
    alpha = rho / rv;
    const Vector s = r - alpha * v;
    x += alpha * phat;
    if (s.norm() <= target) {
      if ((b - A * x).norm() <= target) return x;
    }
    const Vector shat = precond.solve(s);
    const Vector t = A * shat;
    const double tt = t.dot(t);
    if (tt < tiny) return std::nullopt;
    omega = t.dot(s) / tt;
    x += omega * shat;
    r = s - omega * t;
    if (r.norm() <= target && (b - A * x).norm() <= target) return x;
    if (std::abs(omega) < tiny) return std::nullopt;
    rho_old = rho;
  }
  return std::nullopt;
}

}  // namespace ctns
