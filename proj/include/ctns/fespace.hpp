#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

#include "ctns/mesh.hpp"

namespace ctns {

struct FeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The four discrete spaces of the scheme.
enum class SpaceKind {
  ScalarP1,              // species densities n, w and chemical c
  VectorP1NormalTrace,   // flux s, with s.nu = 0 enforced nodally
  MiniVelocity,          // P1 + cubic bubble per component, u = 0 on boundary
  PressureP1MeanZero,    // P1 pressure with a mean-zero multiplier
};

struct DirichletConstraint {
  int dof = -1;
  double value = 0.0;
};

/// Discrete function space over a mesh: DOF map, constraint set and basis
/// evaluation. Immutable after construction.
///
/// DOF numbering is blocked by component, vertices before bubbles:
///   ScalarP1 / PressureP1MeanZero : [vertex 0..V)
///   VectorP1NormalTrace           : [x: 0..V) [y: V..2V)
///   MiniVelocity                  : [x vertices 0..V) [x bubbles V..V+T)
///                                   [y vertices .. ) [y bubbles .. 2(V+T))
class FeSpace {
 public:
  FeSpace(const Mesh& mesh, SpaceKind kind);

  SpaceKind kind() const { return kind_; }
  const Mesh& mesh() const { return *mesh_; }
  int dof_count() const { return dof_count_; }
  int components() const { return components_; }

  /// Scalar shapes per component on one element (3 for P1, 4 with bubble).
  int shapes_per_component() const { return shapes_; }
  /// Local DOFs per element (shapes * components).
  int local_dof_count() const { return shapes_ * components_; }

  /// Global DOF of local index l in element t. Local ordering is
  /// component-major: [comp 0 shapes..., comp 1 shapes...].
  int global_dof(int t, int l) const { return element_dofs_(l, t); }

  const std::vector<DirichletConstraint>& constraints() const { return constraints_; }

  /// Nonempty only for PressureP1MeanZero: weights m_j = integral of phi_j,
  /// defining the mean-zero functional sum_j m_j p_j = 0.
  const Eigen::VectorXd& mean_weights() const { return mean_weights_; }
  bool has_mean_constraint() const { return mean_weights_.size() > 0; }

 private:
  SpaceKind kind_;
  const Mesh* mesh_;
  int dof_count_ = 0;
  int components_ = 1;
  int shapes_ = 3;
  Eigen::MatrixXi element_dofs_;  // local_dof_count x triangle_count
  std::vector<DirichletConstraint> constraints_;
  Eigen::VectorXd mean_weights_;
};

FeSpace build_space(const Mesh& mesh, SpaceKind kind);

/// Values of the component shapes at a barycentric point: out[0..2] = lambda,
/// out[3] = 27 l1 l2 l3 when the space carries bubbles.
void shape_values(const FeSpace& space, const Eigen::Vector3d& bary, double* out);

/// Gradients of the component shapes on element t at a barycentric point.
void shape_gradients(const FeSpace& space, int t, const Eigen::Vector3d& bary,
                     Eigen::Vector2d* out);

/// Point evaluation of a scalar field (ScalarP1 / PressureP1MeanZero).
double eval_scalar(const FeSpace& space, const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                   int t, const Eigen::Vector3d& bary);

/// Gradient of a scalar field on element t.
Eigen::Vector2d eval_scalar_gradient(const FeSpace& space,
                                     const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                     int t, const Eigen::Vector3d& bary);

/// Point evaluation of a vector field (VectorP1NormalTrace / MiniVelocity).
Eigen::Vector2d eval_vector(const FeSpace& space,
                            const Eigen::Ref<const Eigen::VectorXd>& coeffs, int t,
                            const Eigen::Vector3d& bary);

/// Jacobian (rows = components) of a vector field on element t.
Eigen::Matrix2d eval_vector_jacobian(const FeSpace& space,
                                     const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                     int t, const Eigen::Vector3d& bary);

}  // namespace ctns
