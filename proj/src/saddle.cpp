#include "ctns/saddle.hpp"

#include <Eigen/Dense>

#include "ctns/assembly.hpp"
#include "ctns/quadrature.hpp"

namespace ctns {

namespace {

struct ElemElim {
  // per component: bubble diagonal, bubble row and column to the three
  // same-component vertices
  double d[2];
  double row[2][3];
  double col[2][3];
};

}  // namespace

struct SaddleSolver::Impl {
  const FeSpace* vel;
  const FeSpace* pres;
  double mass_coef, Du, k, tol;

  int V, T, block, ncond, pin;
  std::vector<char> fixed;       // over condensed velocity indices [0, 2V)
  std::vector<int> fixed_dofs;   // full velocity dofs that are constrained

  // constant element data (components share the block)
  std::vector<Eigen::Matrix4d> Cb;           // mass_coef M + Du K, local
  std::vector<Eigen::Matrix<double, 8, 3>> Dloc;
  QuadratureRule rule;
  Eigen::MatrixXd tab;  // shape values at rule points

  // per-solve element data
  std::vector<Eigen::Matrix4d> Ab[2];  // current local momentum blocks
  std::vector<ElemElim> elim;

  SparseMatrix cond;              // fixed pattern, values rewritten per solve
  std::vector<int> idx;           // per element scatter -> value index
  std::vector<int> singleton_idx; // fixed diagonals + pin diagonal
  SparseMatrix D;                 // full coupling for residual checks
  Vector mw;                      // pressure mean weights

  SparseLuSolver base;
  bool have_base = false;

  Impl(const FeSpace& velocity, const FeSpace& pressure, double mc, double du,
       double kconv, double tolerance)
      : vel(&velocity),
        pres(&pressure),
        mass_coef(mc),
        Du(du),
        k(kconv),
        tol(tolerance),
        rule(collapsed_gauss_rule(8)) {
    const Mesh& mesh = velocity.mesh();
    V = mesh.vertex_count();
    T = mesh.triangle_count();
    block = V + T;
    ncond = 3 * V;
    pin = 2 * V;  // pressure node 0

    fixed.assign(2 * V, 0);
    for (const auto& c : velocity.constraints()) {
      fixed_dofs.push_back(c.dof);
      const int comp = c.dof / block;
      const int v = c.dof - comp * block;  // constraints are vertex dofs
      fixed[comp * V + v] = 1;
    }

    tab.resize(rule.size(), 4);
    double vals[4];
    for (int q = 0; q < rule.size(); ++q) {
      shape_values(velocity, rule.points[q], vals);
      for (int i = 0; i < 4; ++i) tab(q, i) = vals[i];
    }

    Cb.resize(T);
    Dloc.resize(T);
    Eigen::Vector2d grads[4];
    for (int e = 0; e < T; ++e) {
      Eigen::Matrix4d M = Eigen::Matrix4d::Zero(), K = Eigen::Matrix4d::Zero();
      Eigen::Matrix<double, 8, 3> Dl = Eigen::Matrix<double, 8, 3>::Zero();
      const double s = 2.0 * mesh.geometry(e).area;
      for (int q = 0; q < rule.size(); ++q) {
        shape_gradients(velocity, e, rule.points[q], grads);
        const double w = s * rule.weights[q];
        for (int i = 0; i < 4; ++i) {
          for (int j = 0; j < 4; ++j) {
            M(i, j) += w * tab(q, i) * tab(q, j);
            K(i, j) += w * grads[i].dot(grads[j]);
          }
          for (int p = 0; p < 3; ++p) {
            Dl(i, p) += w * tab(q, p) * grads[i][0];      // x component
            Dl(4 + i, p) += w * tab(q, p) * grads[i][1];  // y component
          }
        }
      }
      Cb[e] = mass_coef * M + Du * K;
      Dloc[e] = Dl;
    }

    Ab[0].resize(T);
    Ab[1].resize(T);
    elim.resize(T);
    D = pressure_coupling(velocity, pressure);
    mw = pressure.mean_weights();

    build_pattern();
  }

  int cond_vid(int comp, int vtx) const { return comp * V + vtx; }

  // Enumerates the scatter targets of one element in a fixed order; used
  // once to build the pattern and per solve to write values.
  template <typename F>
  void for_element_entries(int e, F&& emit) const {
    const auto& tri = vel->mesh().triangle(e);
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 3; ++i) {
        const int ri = cond_vid(c, tri[i]);
        if (fixed[ri]) continue;
        for (int j = 0; j < 3; ++j) {
          const int cj = cond_vid(c, tri[j]);
          if (!fixed[cj]) emit(ri, cj, c, 0, i, j);  // kind 0: K block
        }
        for (int p = 0; p < 3; ++p) {
          emit(ri, 2 * V + tri[p], c, 1, i, p);  // kind 1: -D~ momentum
        }
      }
      for (int p = 0; p < 3; ++p) {
        const int rp = 2 * V + tri[p];
        if (rp == pin) continue;
        for (int j = 0; j < 3; ++j) {
          const int cj = cond_vid(c, tri[j]);
          if (!fixed[cj]) emit(rp, cj, c, 2, p, j);  // kind 2: D~' continuity
        }
      }
    }
    for (int p = 0; p < 3; ++p) {
      const int rp = 2 * V + tri[p];
      if (rp == pin) continue;
      for (int q = 0; q < 3; ++q) {
        emit(rp, 2 * V + tri[q], 0, 3, p, q);  // kind 3: S_pp (both components)
      }
    }
  }

  void build_pattern() {
    std::vector<Eigen::Triplet<double>> trip;
    for (int e = 0; e < T; ++e) {
      for_element_entries(e, [&](int r, int c, int, int, int, int) {
        trip.emplace_back(r, c, 0.0);
      });
    }
    for (int i = 0; i < 2 * V; ++i) {
      if (fixed[i]) trip.emplace_back(i, i, 1.0);
    }
    trip.emplace_back(pin, pin, 1.0);
    cond = SparseMatrix(ncond, ncond);
    cond.setFromTriplets(trip.begin(), trip.end());
    cond.makeCompressed();

    const auto find_index = [&](int r, int c) {
      const int* cols = cond.innerIndexPtr();
      const int lo = cond.outerIndexPtr()[r], hi = cond.outerIndexPtr()[r + 1];
      const int* it = std::lower_bound(cols + lo, cols + hi, c);
      return static_cast<int>(it - cols);
    };
    idx.clear();
    idx.reserve(static_cast<std::size_t>(T) * 63);
    for (int e = 0; e < T; ++e) {
      for_element_entries(e, [&](int r, int c, int, int, int, int) {
        idx.push_back(find_index(r, c));
      });
    }
    singleton_idx.clear();
    for (int i = 0; i < 2 * V; ++i) {
      if (fixed[i]) singleton_idx.push_back(find_index(i, i));
    }
    singleton_idx.push_back(find_index(pin, pin));
  }

  // Fills Ab/elim and the condensed matrix values for the given field.
  void assemble(const Vector& u_prev) {
    const Mesh& mesh = vel->mesh();
    const bool with_b = (k != 0.0) && u_prev.size() == vel->dof_count();
    double* vals = cond.valuePtr();
    std::fill(vals, vals + cond.nonZeros(), 0.0);
    for (int s : singleton_idx) vals[s] = 1.0;

    Eigen::Vector2d grads[4];
    std::size_t cursor = 0;
    for (int e = 0; e < T; ++e) {
      Eigen::Matrix4d B = Eigen::Matrix4d::Zero();
      if (with_b) {
        const auto& tri = mesh.triangle(e);
        double ux[4], uy[4];
        for (int i = 0; i < 3; ++i) {
          ux[i] = u_prev[tri[i]];
          uy[i] = u_prev[block + tri[i]];
        }
        ux[3] = u_prev[V + e];
        uy[3] = u_prev[block + V + e];
        const double s = 2.0 * mesh.geometry(e).area;
        for (int q = 0; q < rule.size(); ++q) {
          shape_gradients(*vel, e, rule.points[q], grads);
          Eigen::Vector2d uq(0, 0);
          for (int i = 0; i < 4; ++i) {
            uq[0] += ux[i] * tab(q, i);
            uq[1] += uy[i] * tab(q, i);
          }
          double ug[4];
          for (int i = 0; i < 4; ++i) ug[i] = uq.dot(grads[i]);
          const double w = 0.5 * s * rule.weights[q];
          for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < i; ++j) {
              const double v = w * (ug[j] * tab(q, i) - ug[i] * tab(q, j));
              B(i, j) += v;
              B(j, i) -= v;
            }
          }
        }
      }
      Ab[0][e] = Cb[e] + k * B;
      Ab[1][e] = Ab[0][e];

      ElemElim& el = elim[e];
      for (int c = 0; c < 2; ++c) {
        const auto& A = Ab[c][e];
        el.d[c] = A(3, 3);
        for (int j = 0; j < 3; ++j) {
          el.row[c][j] = A(3, j);
          el.col[c][j] = A(j, 3);
        }
      }

      for_element_entries(e, [&](int, int, int c, int kind, int a, int b) {
        const auto& A = Ab[c][e];
        const auto& Dl = Dloc[e];
        double v = 0.0;
        switch (kind) {
          case 0:  // condensed velocity block
            v = A(a, b) - A(a, 3) * A(3, b) / A(3, 3);
            break;
          case 1:  // momentum-pressure coupling, carries the minus sign
            v = -(Dl(c * 4 + a, b) - A(a, 3) * Dl(c * 4 + 3, b) / A(3, 3));
            break;
          case 2:  // continuity-velocity coupling
            v = Dl(c * 4 + b, a) - A(3, b) * Dl(c * 4 + 3, a) / A(3, 3);
            break;
          case 3:  // pressure-pressure fill from both bubble components
            v = Dl(3, a) * Dl(3, b) / Ab[0][e](3, 3) +
                Dl(7, a) * Dl(7, b) / Ab[1][e](3, 3);
            break;
        }
        vals[idx[cursor++]] += v;
      });
    }
  }

  Vector condense_rhs(const Vector& b_u, const Vector& b_p) const {
    const Mesh& mesh = vel->mesh();
    Vector bc = Vector::Zero(ncond);
    for (int v = 0; v < V; ++v) {
      bc[v] = b_u[v];
      bc[V + v] = b_u[block + v];
    }
    bc.segment(2 * V, V) = b_p;
    for (int e = 0; e < T; ++e) {
      const auto& tri = mesh.triangle(e);
      for (int c = 0; c < 2; ++c) {
        const double bb = b_u[c * block + V + e] / elim[e].d[c];
        for (int i = 0; i < 3; ++i) {
          bc[cond_vid(c, tri[i])] -= elim[e].col[c][i] * bb;
          bc[2 * V + tri[i]] -= Dloc[e](c * 4 + 3, i) * bb;
        }
      }
    }
    for (int i = 0; i < 2 * V; ++i) {
      if (fixed[i]) bc[i] = 0.0;
    }
    bc[pin] = 0.0;
    return bc;
  }

  Result expand(const Vector& xc, const Vector& b_u) const {
    const Mesh& mesh = vel->mesh();
    Result r;
    r.u = Vector::Zero(vel->dof_count());
    for (int v = 0; v < V; ++v) {
      r.u[v] = xc[v];
      r.u[block + v] = xc[V + v];
    }
    for (int dof : fixed_dofs) r.u[dof] = 0.0;
    r.p = xc.segment(2 * V, V);
    // bubbles: u_b = (b_b - A_bv u_v + D_b p) / d
    for (int e = 0; e < T; ++e) {
      const auto& tri = mesh.triangle(e);
      for (int c = 0; c < 2; ++c) {
        double acc = b_u[c * block + V + e];
        for (int j = 0; j < 3; ++j) {
          acc -= elim[e].row[c][j] * r.u[c * block + tri[j]];
          acc += Dloc[e](c * 4 + 3, j) * r.p[tri[j]];
        }
        r.u[c * block + V + e] = acc / elim[e].d[c];
      }
    }
    // exact zero mean
    r.p.array() -= mw.dot(r.p) / mw.sum();
    return r;
  }

  // Residual of the full multiplier formulation (mu = 0 after the shift).
  double true_residual(const Result& res, const Vector& b_u, const Vector& b_p,
                       double* bnorm) const {
    const Mesh& mesh = vel->mesh();
    Vector ru = b_u + D * res.p;  // momentum rows carry -D p on the left
    for (int e = 0; e < T; ++e) {
      const auto& tri = mesh.triangle(e);
      for (int c = 0; c < 2; ++c) {
        double ul[4];
        for (int j = 0; j < 3; ++j) ul[j] = res.u[c * block + tri[j]];
        ul[3] = res.u[c * block + V + e];
        const auto& A = Ab[c][e];
        for (int i = 0; i < 4; ++i) {
          const int dof = c * block + (i < 3 ? tri[i] : V + e);
          double av = 0.0;
          for (int j = 0; j < 4; ++j) av += A(i, j) * ul[j];
          ru[dof] -= av;
        }
      }
    }
    for (int dof : fixed_dofs) ru[dof] = 0.0;
    const Vector rp = b_p - D.transpose() * res.u;
    const double rm = mw.dot(res.p) / mw.norm();
    double bu2 = 0.0;
    {
      Vector bu = b_u;
      for (int dof : fixed_dofs) bu[dof] = 0.0;
      bu2 = bu.squaredNorm();
    }
    *bnorm = std::sqrt(bu2 + b_p.squaredNorm());
    return std::sqrt(ru.squaredNorm() + rp.squaredNorm() + rm * rm);
  }
};

SaddleSolver::SaddleSolver(const FeSpace& velocity, const FeSpace& pressure,
                           double mass_coef, double Du, double k, double tol)
    : impl_(std::make_unique<Impl>(velocity, pressure, mass_coef, Du, k, tol)) {
  if (velocity.kind() != SpaceKind::MiniVelocity ||
      pressure.kind() != SpaceKind::PressureP1MeanZero) {
    throw SolverFailure("SaddleSolver expects the MINI x P1 pair", 0.0);
  }
}

SaddleSolver::~SaddleSolver() = default;
SaddleSolver::SaddleSolver(SaddleSolver&&) noexcept = default;

SaddleSolver::Result SaddleSolver::solve(const Vector& u_prev, const Vector& b_u,
                                         const Vector& b_p) {
  Impl& im = *impl_;
  im.assemble(u_prev);
  const Vector bc = im.condense_rhs(b_u, b_p);

  std::optional<Vector> xc;
  if (im.have_base) xc = krylov_solve(im.cond, im.base, bc, im.tol, 12);
  if (!xc) {
    im.base.factorize(im.cond);
    im.have_base = true;
    Vector x = im.base.solve(bc);
    const double bnorm = bc.norm();
    for (int it = 0; it < 3 && (bc - im.cond * x).norm() > im.tol * bnorm; ++it) {
      x += im.base.solve(bc - im.cond * x);
    }
    xc = std::move(x);
  }

  Result res = im.expand(*xc, b_u);
  double bnorm = 0.0;
  double r = im.true_residual(res, b_u, b_p, &bnorm);
  if (r > im.tol * bnorm) {
    // refresh the factorization on the current matrix and retry once
    im.base.factorize(im.cond);
    Vector x = im.base.solve(bc);
    for (int it = 0; it < 3 && (bc - im.cond * x).norm() > im.tol * bc.norm(); ++it) {
      x += im.base.solve(bc - im.cond * x);
    }
    res = im.expand(x, b_u);
    r = im.true_residual(res, b_u, b_p, &bnorm);
    if (r > im.tol * bnorm) {
      throw SolverFailure("saddle solve did not reach the residual tolerance", r);
    }
  }
  return res;
}

}  // namespace ctns
