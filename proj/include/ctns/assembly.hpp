#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <stdexcept>
#include <vector>

#include "ctns/fespace.hpp"
#include "ctns/quadrature.hpp"

namespace ctns {

/// Compressed row storage: outerIndexPtr() = row offsets, innerIndexPtr() =
/// column indices, valuePtr() = values. Columns per row are sorted and
/// deduplicated after setFromTriplets/makeCompressed.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A named discrete field: a coefficient vector bound to its space.
/// Non-owning view; both referents must outlive the FieldFunction.
struct FieldFunction {
  const FeSpace& space;
  const Vector& coeffs;
};

/// Spatial functions evaluated at quadrature points during assembly.
using ScalarFn = std::function<double(const Eigen::Vector2d&)>;
using VectorFn = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;
/// Time-dependent sources for load vectors.
using TimeScalarFn = std::function<double(double, const Eigen::Vector2d&)>;
using TimeVectorFn = std::function<Eigen::Vector2d(double, const Eigen::Vector2d&)>;

/// M_ij = (phi_j, phi_i). Symmetric positive definite.
SparseMatrix mass_matrix(const FeSpace& space);

/// K_ij = D (grad phi_j, grad phi_i). Symmetric PSD; constants in the kernel.
SparseMatrix stiffness_matrix(const FeSpace& space, double diffusion);

/// Dc [ (div phi_j, div phi_i) + (rot phi_j, rot phi_i) ] on the flux space;
/// rot v = dx v2 - dy v1.
SparseMatrix divdiv_rotrot_matrix(const FeSpace& space, double Dc);

/// Skew-symmetric transport on a scalar space:
/// A_ij = 1/2 [ ((u.grad) phi_j, phi_i) - ((u.grad) phi_i, phi_j) ].
SparseMatrix transport_matrix_A(const FeSpace& space, const FieldFunction& u);

/// Skew-symmetric convection on the velocity space, same antisymmetrization.
SparseMatrix convection_matrix_B(const FeSpace& space, const FieldFunction& u);

/// G_ij = scale ([g]+ phi_j, phi_i) with [g]+ = max{0,g} applied pointwise
/// at quadrature points. PSD for any g.
SparseMatrix truncated_weight_mass(const FeSpace& space, const FieldFunction& g,
                                   double scale);

/// C_ij = chi (phi_j s_prev, grad phi_i); enters the density solves with a
/// minus sign on the system matrix.
SparseMatrix chemo_matrix(const FeSpace& space, const FieldFunction& s_prev,
                          double chi);

/// D_ij = (psi_j, div Phi_i), velocity dofs x pressure dofs. The momentum
/// rows use -D, the continuity rows D^T.
SparseMatrix pressure_coupling(const FeSpace& velocity, const FeSpace& pressure);

/// b_i = (u_m . s_prev + (alpha n_m + beta w_m) c_prev, div Phi_i) on the
/// flux space. Current velocity/densities, previous flux/chemical.
Vector flux_rhs(const FeSpace& space_s, const FieldFunction& u_m,
                const FieldFunction& s_prev, const FieldFunction& n_m,
                const FieldFunction& w_m, const FieldFunction& c_prev, double alpha,
                double beta);

/// b_i = (f(t,.), phi_i).
Vector load_vector(const FeSpace& space, const TimeScalarFn& f, double t);
Vector load_vector(const FeSpace& space, const TimeVectorFn& f, double t);

/// b_i = ((gamma n + lambda w) grad_phi, Phi_i) on the velocity space.
Vector buoyancy_rhs(const FeSpace& velocity, const FieldFunction& n,
                    const FieldFunction& w, double gamma, double lambda,
                    const VectorFn& grad_phi);

/// Fused per-step operator of the scalar solves:
///   mass_coef M + diffusion K + A(u_prev) + sum_k scale_k G(g_k) - chi C(s_prev).
/// u_prev and s_prev may be null; equivalent to summing the parts.
struct TruncatedWeight {
  double scale;
  const Vector* g;  // ScalarP1 coefficients, truncated at quadrature points
};
SparseMatrix scalar_system_matrix(const FeSpace& space, double mass_coef,
                                  double diffusion, const FieldFunction* u_prev,
                                  const std::vector<TruncatedWeight>& weights,
                                  double chi, const FieldFunction* s_prev);

/// Fused velocity block mass_coef M_u + Du K_u + k B(u_prev).
SparseMatrix momentum_block(const FeSpace& velocity, double mass_coef, double Du,
                            double k, const FieldFunction* u_prev);

/// Quadrature used for assembly over the given space: the degree-5 symmetric
/// rule for P1 spaces, a collapsed Gauss rule exact to degree 8 when bubbles
/// are present.
const QuadratureRule& assembly_rule(const FeSpace& space);

}  // namespace ctns
