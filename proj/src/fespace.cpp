#include "ctns/fespace.hpp"

namespace ctns {

FeSpace::FeSpace(const Mesh& mesh, SpaceKind kind) : kind_(kind), mesh_(&mesh) {
  const int V = mesh.vertex_count();
  const int T = mesh.triangle_count();

  switch (kind) {
    case SpaceKind::ScalarP1:
    case SpaceKind::PressureP1MeanZero:
      components_ = 1;
      shapes_ = 3;
      dof_count_ = V;
      break;
    case SpaceKind::VectorP1NormalTrace:
      components_ = 2;
      shapes_ = 3;
      dof_count_ = 2 * V;
      break;
    case SpaceKind::MiniVelocity:
      components_ = 2;
      shapes_ = 4;
      dof_count_ = 2 * (V + T);
      break;
  }

  element_dofs_.resize(local_dof_count(), T);
  const int block = (kind == SpaceKind::MiniVelocity) ? V + T : V;
  for (int t = 0; t < T; ++t) {
    const auto& tri = mesh.triangle(t);
    for (int c = 0; c < components_; ++c) {
      for (int i = 0; i < 3; ++i) {
        element_dofs_(c * shapes_ + i, t) = c * block + tri[i];
      }
      if (shapes_ == 4) element_dofs_(c * shapes_ + 3, t) = c * block + V + t;
    }
  }

  if (kind == SpaceKind::VectorP1NormalTrace) {
    // Nodal normal-trace constraint on the axis-aligned rectangle: the
    // component normal to each incident side is zeroed; corners get both.
    for (int v = 0; v < V; ++v) {
      const auto s = mesh.vertex_sides(v);
      if (s & (side_left | side_right)) constraints_.push_back({v, 0.0});
      if (s & (side_bottom | side_top)) constraints_.push_back({V + v, 0.0});
    }
  } else if (kind == SpaceKind::MiniVelocity) {
    // Full Dirichlet on vertex DOFs; bubbles vanish on element boundaries
    // and are never constrained.
    for (int v = 0; v < V; ++v) {
      if (mesh.is_boundary_vertex(v)) {
        constraints_.push_back({v, 0.0});
        constraints_.push_back({block + v, 0.0});
      }
    }
  } else if (kind == SpaceKind::PressureP1MeanZero) {
    mean_weights_ = Eigen::VectorXd::Zero(V);
    for (int t = 0; t < T; ++t) {
      const double a3 = mesh.geometry(t).area / 3.0;
      for (int i = 0; i < 3; ++i) mean_weights_[mesh.triangle(t)[i]] += a3;
    }
  }
}

FeSpace build_space(const Mesh& mesh, SpaceKind kind) { return FeSpace(mesh, kind); }

void shape_values(const FeSpace& space, const Eigen::Vector3d& bary, double* out) {
  out[0] = bary[0];
  out[1] = bary[1];
  out[2] = bary[2];
  if (space.shapes_per_component() == 4) out[3] = 27.0 * bary[0] * bary[1] * bary[2];
}

void shape_gradients(const FeSpace& space, int t, const Eigen::Vector3d& bary,
                     Eigen::Vector2d* out) {
  const auto& gl = space.mesh().geometry(t).grad_lambda;
  out[0] = gl.col(0);
  out[1] = gl.col(1);
  out[2] = gl.col(2);
  if (space.shapes_per_component() == 4) {
    out[3] = 27.0 * (bary[1] * bary[2] * gl.col(0) + bary[0] * bary[2] * gl.col(1) +
                     bary[0] * bary[1] * gl.col(2));
  }
}

namespace {

void check_coeffs(const FeSpace& space, const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
  if (coeffs.size() != space.dof_count()) {
    throw FeError("coefficient vector length does not match space dof_count");
  }
}

}  // namespace

double eval_scalar(const FeSpace& space, const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                   int t, const Eigen::Vector3d& bary) {
  if (space.components() != 1) throw FeError("eval_scalar: vector-valued space");
  check_coeffs(space, coeffs);
  double vals[4];
  shape_values(space, bary, vals);
  double r = 0.0;
  for (int i = 0; i < space.shapes_per_component(); ++i) {
    r += coeffs[space.global_dof(t, i)] * vals[i];
  }
  return r;
}

Eigen::Vector2d eval_scalar_gradient(const FeSpace& space,
                                     const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                     int t, const Eigen::Vector3d& bary) {
  if (space.components() != 1) throw FeError("eval_scalar_gradient: vector-valued space");
  check_coeffs(space, coeffs);
  Eigen::Vector2d grads[4];
  shape_gradients(space, t, bary, grads);
  Eigen::Vector2d r = Eigen::Vector2d::Zero();
  for (int i = 0; i < space.shapes_per_component(); ++i) {
    r += coeffs[space.global_dof(t, i)] * grads[i];
  }
  return r;
}

Eigen::Vector2d eval_vector(const FeSpace& space,
                            const Eigen::Ref<const Eigen::VectorXd>& coeffs, int t,
                            const Eigen::Vector3d& bary) {
  if (space.components() != 2) throw FeError("eval_vector: scalar space");
  check_coeffs(space, coeffs);
  double vals[4];
  shape_values(space, bary, vals);
  const int ns = space.shapes_per_component();
  Eigen::Vector2d r = Eigen::Vector2d::Zero();
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < ns; ++i) {
      r[c] += coeffs[space.global_dof(t, c * ns + i)] * vals[i];
    }
  }
  return r;
}

Eigen::Matrix2d eval_vector_jacobian(const FeSpace& space,
                                     const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                     int t, const Eigen::Vector3d& bary) {
  if (space.components() != 2) throw FeError("eval_vector_jacobian: scalar space");
  check_coeffs(space, coeffs);
  Eigen::Vector2d grads[4];
  shape_gradients(space, t, bary, grads);
  const int ns = space.shapes_per_component();
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();  // J(c, d) = d u_c / d x_d
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < ns; ++i) {
      J.row(c) += coeffs[space.global_dof(t, c * ns + i)] * grads[i].transpose();
    }
  }
  return J;
}

}  // namespace ctns
