#include "ctns/assembly.hpp"

#include <Eigen/Dense>

#include <optional>

namespace ctns {
namespace {

using Triplet = Eigen::Triplet<double>;

const QuadratureRule& p1_rule() {
  static const QuadratureRule r = triangle_quadrature(5);
  return r;
}

const QuadratureRule& bubble_rule() {
  // Degree 8 covers the worst MINI integrand (bubble x grad-bubble x bubble).
  static const QuadratureRule r = collapsed_gauss_rule(8);
  return r;
}

void require(bool ok, const char* msg) {
  if (!ok) throw AssemblyError(msg);
}

void require_same_mesh(const FeSpace& a, const FeSpace& b) {
  require(&a.mesh() == &b.mesh(), "spaces live on different meshes");
}

void require_field(const FieldFunction& f) {
  require(f.coeffs.size() == f.space.dof_count(),
          "field coefficient length does not match its space");
}

// Component-shape values of `space` at every rule point (size x shapes).
Eigen::MatrixXd shape_value_table(const FeSpace& space, const QuadratureRule& rule) {
  Eigen::MatrixXd tab(rule.size(), space.shapes_per_component());
  double vals[4];
  for (int q = 0; q < rule.size(); ++q) {
    shape_values(space, rule.points[q], vals);
    for (int i = 0; i < space.shapes_per_component(); ++i) tab(q, i) = vals[i];
  }
  return tab;
}

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& trip) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

void scatter_block(const FeSpace& space, int t, const Eigen::MatrixXd& local,
                   std::vector<Triplet>& trip) {
  const int n = space.local_dof_count();
  for (int i = 0; i < n; ++i) {
    const int gi = space.global_dof(t, i);
    for (int j = 0; j < n; ++j) {
      trip.emplace_back(gi, space.global_dof(t, j), local(i, j));
    }
  }
}

// Gathered element coefficients of a field defined on the same mesh.
struct LocalField {
  const FeSpace& space;
  const Vector& coeffs;
  double local[8] = {0, 0, 0, 0, 0, 0, 0, 0};

  explicit LocalField(const FieldFunction& f) : space(f.space), coeffs(f.coeffs) {
    require_field(f);
  }
  void gather(int t) {
    for (int l = 0; l < space.local_dof_count(); ++l) {
      local[l] = coeffs[space.global_dof(t, l)];
    }
  }
  double scalar_at(const Eigen::MatrixXd& tab, int q) const {
    double r = 0.0;
    for (int i = 0; i < space.shapes_per_component(); ++i) r += local[i] * tab(q, i);
    return r;
  }
  Eigen::Vector2d vector_at(const Eigen::MatrixXd& tab, int q) const {
    const int ns = space.shapes_per_component();
    Eigen::Vector2d r = Eigen::Vector2d::Zero();
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < ns; ++i) r[c] += local[c * ns + i] * tab(q, i);
    }
    return r;
  }
};

}  // namespace

const QuadratureRule& assembly_rule(const FeSpace& space) {
  return space.shapes_per_component() == 4 ? bubble_rule() : p1_rule();
}

SparseMatrix mass_matrix(const FeSpace& space) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = assembly_rule(space);
  const Eigen::MatrixXd tab = shape_value_table(space, rule);
  const int ns = space.shapes_per_component();
  const int nc = space.components();

  // Reference component block: integral of s_i s_j over the reference
  // triangle; physical block is 2|K| times it.
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(ns, ns);
  for (int q = 0; q < rule.size(); ++q) {
    ref += rule.weights[q] * tab.row(q).transpose() * tab.row(q);
  }

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.triangle_count()) * ns * ns * nc);
  Eigen::MatrixXd local(space.local_dof_count(), space.local_dof_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    local.setZero();
    const double s = 2.0 * mesh.geometry(t).area;
    for (int c = 0; c < nc; ++c) {
      local.block(c * ns, c * ns, ns, ns) = s * ref;
    }
    scatter_block(space, t, local, trip);
  }
  return from_triplets(space.dof_count(), space.dof_count(), trip);
}

SparseMatrix stiffness_matrix(const FeSpace& space, double diffusion) {
  require(diffusion > 0.0, "stiffness_matrix: diffusion coefficient must be positive");
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = assembly_rule(space);
  const int ns = space.shapes_per_component();
  const int nc = space.components();

  std::vector<Triplet> trip;
  Eigen::MatrixXd local(space.local_dof_count(), space.local_dof_count());
  Eigen::MatrixXd block(ns, ns);
  Eigen::Vector2d grads[4];
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    block.setZero();
    const double s = 2.0 * mesh.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      shape_gradients(space, t, rule.points[q], grads);
      for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < ns; ++j) {
          block(i, j) += s * rule.weights[q] * grads[i].dot(grads[j]);
        }
      }
    }
    local.setZero();
    for (int c = 0; c < nc; ++c) {
      local.block(c * ns, c * ns, ns, ns) = diffusion * block;
    }
    scatter_block(space, t, local, trip);
  }
  return from_triplets(space.dof_count(), space.dof_count(), trip);
}

SparseMatrix divdiv_rotrot_matrix(const FeSpace& space, double Dc) {
  require(space.kind() == SpaceKind::VectorP1NormalTrace,
          "divdiv_rotrot_matrix: expects the flux space");
  require(Dc > 0.0, "divdiv_rotrot_matrix: coefficient must be positive");
  const Mesh& mesh = space.mesh();
  const int n = space.local_dof_count();  // 6

  std::vector<Triplet> trip;
  Eigen::MatrixXd local(n, n);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& gl = mesh.geometry(t).grad_lambda;
    const double area = mesh.geometry(t).area;
    // Basis l = c*3+i is lambda_i e_c: div = d_c lambda_i,
    // rot = (c==0) ? -dy lambda_i : dx lambda_i; both element-constant.
    double div[6], rot[6];
    for (int i = 0; i < 3; ++i) {
      div[i] = gl(0, i);
      div[3 + i] = gl(1, i);
      rot[i] = -gl(1, i);
      rot[3 + i] = gl(0, i);
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        local(i, j) = Dc * area * (div[i] * div[j] + rot[i] * rot[j]);
      }
    }
    scatter_block(space, t, local, trip);
  }
  return from_triplets(space.dof_count(), space.dof_count(), trip);
}

namespace {

// Shared core of the two skew-symmetric forms: local(i,j) over scalar shapes
// gets 1/2 [ (u.grad s_j) s_i - (u.grad s_i) s_j ]; the vector form applies
// the same block to each velocity component.
void skew_transport_block(const FeSpace& space, const LocalField& u,
                          const Eigen::MatrixXd& tab_space,
                          const Eigen::MatrixXd& tab_u, const QuadratureRule& rule,
                          int t, Eigen::MatrixXd& block) {
  const int ns = space.shapes_per_component();
  block.setZero();
  const double s = 2.0 * space.mesh().geometry(t).area;
  Eigen::Vector2d grads[4];
  for (int q = 0; q < rule.size(); ++q) {
    shape_gradients(space, t, rule.points[q], grads);
    const Eigen::Vector2d uq = u.vector_at(tab_u, q);
    double ug[4];
    for (int i = 0; i < ns; ++i) ug[i] = uq.dot(grads[i]);
    const double w = 0.5 * s * rule.weights[q];
    for (int i = 0; i < ns; ++i) {
      for (int j = 0; j < i; ++j) {
        const double v = w * (ug[j] * tab_space(q, i) - ug[i] * tab_space(q, j));
        block(i, j) += v;
        block(j, i) -= v;
      }
    }
  }
}

}  // namespace

SparseMatrix transport_matrix_A(const FeSpace& space, const FieldFunction& u) {
  require(space.components() == 1, "transport_matrix_A: expects a scalar space");
  require(u.space.components() == 2, "transport_matrix_A: u must be vector-valued");
  require_same_mesh(space, u.space);
  const QuadratureRule& rule = p1_rule();  // integrand degree <= 4 with MINI u
  const Eigen::MatrixXd tab = shape_value_table(space, rule);
  const Eigen::MatrixXd tab_u = shape_value_table(u.space, rule);
  LocalField lu(u);

  std::vector<Triplet> trip;
  Eigen::MatrixXd block(3, 3);
  for (int t = 0; t < space.mesh().triangle_count(); ++t) {
    lu.gather(t);
    skew_transport_block(space, lu, tab, tab_u, rule, t, block);
    scatter_block(space, t, block, trip);
  }
  return from_triplets(space.dof_count(), space.dof_count(), trip);
}

SparseMatrix convection_matrix_B(const FeSpace& space, const FieldFunction& u) {
  require(space.kind() == SpaceKind::MiniVelocity,
          "convection_matrix_B: expects the velocity space");
  require(u.space.components() == 2, "convection_matrix_B: u must be vector-valued");
  require_same_mesh(space, u.space);
  const QuadratureRule& rule = bubble_rule();
  const Eigen::MatrixXd tab = shape_value_table(space, rule);
  const Eigen::MatrixXd tab_u = shape_value_table(u.space, rule);
  LocalField lu(u);

  const int ns = space.shapes_per_component();
  std::vector<Triplet> trip;
  Eigen::MatrixXd block(ns, ns), local(2 * ns, 2 * ns);
  for (int t = 0; t < space.mesh().triangle_count(); ++t) {
    lu.gather(t);
    skew_transport_block(space, lu, tab, tab_u, rule, t, block);
    local.setZero();
    local.block(0, 0, ns, ns) = block;
    local.block(ns, ns, ns, ns) = block;
    scatter_block(space, t, local, trip);
  }
  return from_triplets(space.dof_count(), space.dof_count(), trip);
}

SparseMatrix truncated_weight_mass(const FeSpace& space, const FieldFunction& g,
                                   double scale) {
  require(space.components() == 1, "truncated_weight_mass: expects a scalar space");
  require(g.space.components() == 1, "truncated_weight_mass: weight must be scalar");
  require_same_mesh(space, g.space);
  const QuadratureRule& rule = p1_rule();
  const Eigen::MatrixXd tab = shape_value_table(space, rule);
  const Eigen::MatrixXd tab_g = shape_value_table(g.space, rule);
  LocalField lg(g);

  std::vector<Triplet> trip;
  Eigen::MatrixXd block(3, 3);
  for (int t = 0; t < space.mesh().triangle_count(); ++t) {
    lg.gather(t);
    block.setZero();
    const double s = 2.0 * space.mesh().geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      const double gq = std::max(0.0, lg.scalar_at(tab_g, q));
      if (gq == 0.0) continue;
      const double w = scale * s * rule.weights[q] * gq;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) block(i, j) += w * tab(q, i) * tab(q, j);
      }
    }
    scatter_block(space, t, block, trip);
  }
  return from_triplets(space.dof_count(), space.dof_count(), trip);
}

SparseMatrix chemo_matrix(const FeSpace& space, const FieldFunction& s_prev,
                          double chi) {
  require(space.components() == 1, "chemo_matrix: expects a scalar space");
  require(s_prev.space.kind() == SpaceKind::VectorP1NormalTrace,
          "chemo_matrix: s must live on the flux space");
  require_same_mesh(space, s_prev.space);
  const QuadratureRule& rule = p1_rule();
  const Eigen::MatrixXd tab = shape_value_table(space, rule);
  const Eigen::MatrixXd tab_s = shape_value_table(s_prev.space, rule);
  LocalField ls(s_prev);

  std::vector<Triplet> trip;
  Eigen::MatrixXd block(3, 3);
  Eigen::Vector2d grads[4];
  for (int t = 0; t < space.mesh().triangle_count(); ++t) {
    ls.gather(t);
    block.setZero();
    const double s = 2.0 * space.mesh().geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      shape_gradients(space, t, rule.points[q], grads);
      const Eigen::Vector2d sq = ls.vector_at(tab_s, q);
      const double w = chi * s * rule.weights[q];
      for (int i = 0; i < 3; ++i) {
        const double sg = sq.dot(grads[i]);
        for (int j = 0; j < 3; ++j) block(i, j) += w * tab(q, j) * sg;
      }
    }
    scatter_block(space, t, block, trip);
  }
  return from_triplets(space.dof_count(), space.dof_count(), trip);
}

SparseMatrix pressure_coupling(const FeSpace& velocity, const FeSpace& pressure) {
  require(velocity.kind() == SpaceKind::MiniVelocity,
          "pressure_coupling: expects the velocity space first");
  require(pressure.kind() == SpaceKind::PressureP1MeanZero,
          "pressure_coupling: expects the pressure space second");
  require_same_mesh(velocity, pressure);
  const QuadratureRule& rule = bubble_rule();
  const Eigen::MatrixXd tab_p = shape_value_table(pressure, rule);
  const int ns = velocity.shapes_per_component();

  std::vector<Triplet> trip;
  Eigen::Vector2d grads[4];
  Eigen::MatrixXd local(2 * ns, 3);
  for (int t = 0; t < velocity.mesh().triangle_count(); ++t) {
    local.setZero();
    const double s = 2.0 * velocity.mesh().geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      shape_gradients(velocity, t, rule.points[q], grads);
      const double w = s * rule.weights[q];
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < ns; ++i) {
          const double div = grads[i][c];  // div of shape_i e_c
          for (int j = 0; j < 3; ++j) {
            local(c * ns + i, j) += w * tab_p(q, j) * div;
          }
        }
      }
    }
    for (int i = 0; i < 2 * ns; ++i) {
      const int gi = velocity.global_dof(t, i);
      for (int j = 0; j < 3; ++j) {
        trip.emplace_back(gi, pressure.global_dof(t, j), local(i, j));
      }
    }
  }
  return from_triplets(velocity.dof_count(), pressure.dof_count(), trip);
}

Vector flux_rhs(const FeSpace& space_s, const FieldFunction& u_m,
                const FieldFunction& s_prev, const FieldFunction& n_m,
                const FieldFunction& w_m, const FieldFunction& c_prev, double alpha,
                double beta) {
  require(space_s.kind() == SpaceKind::VectorP1NormalTrace,
          "flux_rhs: expects the flux space");
  require(u_m.space.components() == 2 && s_prev.space.components() == 2,
          "flux_rhs: u and s must be vector-valued");
  require(n_m.space.components() == 1 && w_m.space.components() == 1 &&
              c_prev.space.components() == 1,
          "flux_rhs: n, w, c must be scalar");
  require_same_mesh(space_s, u_m.space);
  require_same_mesh(space_s, s_prev.space);
  require_same_mesh(space_s, n_m.space);
  require_same_mesh(space_s, w_m.space);
  require_same_mesh(space_s, c_prev.space);

  const QuadratureRule& rule = p1_rule();  // integrand degree <= 4
  const Eigen::MatrixXd tab_u = shape_value_table(u_m.space, rule);
  const Eigen::MatrixXd tab_s = shape_value_table(s_prev.space, rule);
  const Eigen::MatrixXd tab_n = shape_value_table(n_m.space, rule);
  LocalField lu(u_m), lsp(s_prev), ln(n_m), lw(w_m), lc(c_prev);

  Vector b = Vector::Zero(space_s.dof_count());
  for (int t = 0; t < space_s.mesh().triangle_count(); ++t) {
    lu.gather(t);
    lsp.gather(t);
    ln.gather(t);
    lw.gather(t);
    lc.gather(t);
    const auto& gl = space_s.mesh().geometry(t).grad_lambda;
    const double s = 2.0 * space_s.mesh().geometry(t).area;
    double acc[6] = {0, 0, 0, 0, 0, 0};
    for (int q = 0; q < rule.size(); ++q) {
      const double f = lu.vector_at(tab_u, q).dot(lsp.vector_at(tab_s, q)) +
                       (alpha * ln.scalar_at(tab_n, q) + beta * lw.scalar_at(tab_n, q)) *
                           lc.scalar_at(tab_n, q);
      const double w = s * rule.weights[q] * f;
      for (int i = 0; i < 3; ++i) {
        acc[i] += w * gl(0, i);      // div of lambda_i e_x
        acc[3 + i] += w * gl(1, i);  // div of lambda_i e_y
      }
    }
    for (int l = 0; l < 6; ++l) b[space_s.global_dof(t, l)] += acc[l];
  }
  return b;
}

Vector load_vector(const FeSpace& space, const TimeScalarFn& f, double t) {
  require(space.components() == 1, "load_vector: scalar source on a vector space");
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = assembly_rule(space);
  const Eigen::MatrixXd tab = shape_value_table(space, rule);

  Vector b = Vector::Zero(space.dof_count());
  for (int e = 0; e < mesh.triangle_count(); ++e) {
    const double s = 2.0 * mesh.geometry(e).area;
    for (int q = 0; q < rule.size(); ++q) {
      const double w = s * rule.weights[q] * f(t, mesh.point(e, rule.points[q]));
      for (int i = 0; i < space.shapes_per_component(); ++i) {
        b[space.global_dof(e, i)] += w * tab(q, i);
      }
    }
  }
  return b;
}

Vector load_vector(const FeSpace& space, const TimeVectorFn& f, double t) {
  require(space.components() == 2, "load_vector: vector source on a scalar space");
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = assembly_rule(space);
  const Eigen::MatrixXd tab = shape_value_table(space, rule);
  const int ns = space.shapes_per_component();

  Vector b = Vector::Zero(space.dof_count());
  for (int e = 0; e < mesh.triangle_count(); ++e) {
    const double s = 2.0 * mesh.geometry(e).area;
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d fq = s * rule.weights[q] * f(t, mesh.point(e, rule.points[q]));
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < ns; ++i) {
          b[space.global_dof(e, c * ns + i)] += fq[c] * tab(q, i);
        }
      }
    }
  }
  return b;
}

Vector buoyancy_rhs(const FeSpace& velocity, const FieldFunction& n,
                    const FieldFunction& w, double gamma, double lambda,
                    const VectorFn& grad_phi) {
  require(velocity.components() == 2, "buoyancy_rhs: expects the velocity space");
  require(n.space.components() == 1 && w.space.components() == 1,
          "buoyancy_rhs: densities must be scalar");
  require_same_mesh(velocity, n.space);
  require_same_mesh(velocity, w.space);
  const Mesh& mesh = velocity.mesh();
  const QuadratureRule& rule = assembly_rule(velocity);
  const Eigen::MatrixXd tab = shape_value_table(velocity, rule);
  const Eigen::MatrixXd tab_n = shape_value_table(n.space, rule);
  LocalField ln(n), lw(w);
  const int ns = velocity.shapes_per_component();

  Vector b = Vector::Zero(velocity.dof_count());
  for (int e = 0; e < mesh.triangle_count(); ++e) {
    ln.gather(e);
    lw.gather(e);
    const double s = 2.0 * mesh.geometry(e).area;
    for (int q = 0; q < rule.size(); ++q) {
      const double dens =
          gamma * ln.scalar_at(tab_n, q) + lambda * lw.scalar_at(tab_n, q);
      const Eigen::Vector2d fq =
          s * rule.weights[q] * dens * grad_phi(mesh.point(e, rule.points[q]));
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < ns; ++i) {
          b[velocity.global_dof(e, c * ns + i)] += fq[c] * tab(q, i);
        }
      }
    }
  }
  return b;
}

SparseMatrix scalar_system_matrix(const FeSpace& space, double mass_coef,
                                  double diffusion, const FieldFunction* u_prev,
                                  const std::vector<TruncatedWeight>& weights,
                                  double chi, const FieldFunction* s_prev) {
  require(space.components() == 1, "scalar_system_matrix: expects a scalar space");
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = p1_rule();
  const Eigen::MatrixXd tab = shape_value_table(space, rule);

  std::optional<LocalField> lu, ls;
  Eigen::MatrixXd tab_u, tab_s;
  if (u_prev) {
    require_same_mesh(space, u_prev->space);
    lu.emplace(*u_prev);
    tab_u = shape_value_table(u_prev->space, rule);
  }
  if (s_prev) {
    require_same_mesh(space, s_prev->space);
    ls.emplace(*s_prev);
    tab_s = shape_value_table(s_prev->space, rule);
  }
  std::vector<LocalField> lg;
  for (const auto& tw : weights) {
    lg.push_back(LocalField(FieldFunction{space, *tw.g}));
  }

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
  Eigen::MatrixXd block(3, 3);
  Eigen::Vector2d grads[4];
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    if (lu) lu->gather(t);
    if (ls) ls->gather(t);
    for (auto& g : lg) g.gather(t);
    block.setZero();
    const double s = 2.0 * mesh.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      shape_gradients(space, t, rule.points[q], grads);
      const double w = s * rule.weights[q];

      double mass_like = mass_coef;
      for (std::size_t k = 0; k < lg.size(); ++k) {
        mass_like += weights[k].scale * std::max(0.0, lg[k].scalar_at(tab, q));
      }
      double ug[3] = {0, 0, 0};
      if (lu) {
        const Eigen::Vector2d uq = lu->vector_at(tab_u, q);
        for (int i = 0; i < 3; ++i) ug[i] = uq.dot(grads[i]);
      }
      Eigen::Vector2d sq = Eigen::Vector2d::Zero();
      if (ls) sq = ls->vector_at(tab_s, q);

      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          double v = mass_like * tab(q, i) * tab(q, j) +
                     diffusion * grads[i].dot(grads[j]) +
                     0.5 * (ug[j] * tab(q, i) - ug[i] * tab(q, j)) -
                     chi * tab(q, j) * sq.dot(grads[i]);
          block(i, j) += w * v;
        }
      }
    }
    scatter_block(space, t, block, trip);
  }
  return from_triplets(space.dof_count(), space.dof_count(), trip);
}

SparseMatrix momentum_block(const FeSpace& velocity, double mass_coef, double Du,
                            double k, const FieldFunction* u_prev) {
  require(velocity.kind() == SpaceKind::MiniVelocity,
          "momentum_block: expects the velocity space");
  const Mesh& mesh = velocity.mesh();
  const QuadratureRule& rule = bubble_rule();
  const Eigen::MatrixXd tab = shape_value_table(velocity, rule);
  const int ns = velocity.shapes_per_component();

  std::optional<LocalField> lu;
  if (u_prev && k != 0.0) {
    require_same_mesh(velocity, u_prev->space);
    lu.emplace(*u_prev);
  }

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 4 * ns * ns);
  Eigen::MatrixXd block(ns, ns), local(2 * ns, 2 * ns);
  Eigen::Vector2d grads[4];
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    if (lu) lu->gather(t);
    block.setZero();
    const double s = 2.0 * mesh.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      shape_gradients(velocity, t, rule.points[q], grads);
      const double w = s * rule.weights[q];
      double ug[4] = {0, 0, 0, 0};
      if (lu) {
        const Eigen::Vector2d uq = lu->vector_at(tab, q);
        for (int i = 0; i < ns; ++i) ug[i] = k * uq.dot(grads[i]);
      }
      for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < ns; ++j) {
          block(i, j) += w * (mass_coef * tab(q, i) * tab(q, j) +
                              Du * grads[i].dot(grads[j]) +
                              0.5 * (ug[j] * tab(q, i) - ug[i] * tab(q, j)));
        }
      }
    }
    local.setZero();
    local.block(0, 0, ns, ns) = block;
    local.block(ns, ns, ns, ns) = block;
    scatter_block(velocity, t, local, trip);
  }
  return from_triplets(velocity.dof_count(), velocity.dof_count(), trip);
}

}  // namespace ctns
