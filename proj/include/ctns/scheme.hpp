#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ctns/assembly.hpp"
#include "ctns/linsolve.hpp"

namespace ctns {

struct SchemeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// All physical coefficients of the system plus the gravitational potential
/// gradient. k = 0 drops the convection term (Stokes flow).
struct ModelParams {
  double chi1 = 1.0, chi2 = 1.0;          // chemotactic sensitivities
  double Dn = 1.0, Dw = 1.0, Dc = 1.0, Du = 1.0;
  double mu1 = 1.0, mu2 = 1.0;            // growth rates
  double a1 = 1.0, a2 = 1.0;              // competition strengths
  double alpha = 1.0, beta = 1.0;         // consumption rates
  double gamma = 1.0, lambda = 1.0;       // buoyancy coefficients
  double k = 1.0;                         // convection switch
  VectorFn grad_phi;                      // empty means zero potential

  void validate() const;  // throws SchemeError on sign violations
};

/// Discrete solution at one time level.
struct State {
  int step = 0;
  double time = 0.0;
  Vector n, w, c;  // ScalarP1
  Vector s;        // VectorP1NormalTrace
  Vector u;        // MiniVelocity
  Vector pi;       // PressureP1MeanZero
};

/// The four spaces of the scheme over one mesh (n, w, c share the scalar
/// space).
struct Spaces {
  explicit Spaces(const Mesh& m)
      : mesh(&m),
        scalar(m, SpaceKind::ScalarP1),
        flux(m, SpaceKind::VectorP1NormalTrace),
        velocity(m, SpaceKind::MiniVelocity),
        pressure(m, SpaceKind::PressureP1MeanZero) {}

  const Mesh* mesh;
  FeSpace scalar, flux, velocity, pressure;
};

/// Closed-form fields with the derivatives each projection needs.
struct ScalarField {
  ScalarFn value;
  VectorFn gradient;
};
struct FluxField {
  VectorFn value;
  ScalarFn divergence;
  ScalarFn curl;
};
struct VelocityField {
  VectorFn value;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> jacobian;
};

/// Initial fields; s0 = grad c0 is supplied in closed form, pi0 may be null
/// (taken as zero).
struct InitialData {
  ScalarField n0, w0, c0;
  FluxField s0;
  VelocityField u0;
  ScalarFn pi0;
};

/// Optional per-equation sources for manufactured runs; either all absent or
/// all present. When the sources are sums of exponentials in time, the
/// separable representation lets the stepper precompute load vectors.
struct Forcing {
  TimeScalarFn Fn, Fw, Fc;
  TimeVectorFn Fs, Fu;

  struct ScalarTerm {
    double rate;
    ScalarFn g;
  };
  struct VectorTerm {
    double rate;
    VectorFn g;
  };
  std::vector<ScalarTerm> sep_Fn, sep_Fw, sep_Fc;
  std::vector<VectorTerm> sep_Fs, sep_Fu;

  bool present() const { return static_cast<bool>(Fn); }
  bool separable() const { return !sep_Fn.empty(); }
};

/// Galerkin projection onto the scalar space:
/// (grad(Pn - n), grad v) + (Pn - n, v) = 0 for all v.
Vector elliptic_projection(const FeSpace& space, const ScalarField& exact);

/// Flux variant with the div/rot/L2 form and normal-trace constraints.
Vector elliptic_projection(const FeSpace& space, const FluxField& exact);

/// Discrete Stokes projection of (u, pi):
///   Du (grad(Pu - u), grad v) - (Ppi - pi, div v) = 0,
///   (div(Pu - u), q) = 0,
/// with the mean-zero multiplier making the pressure unique.
std::pair<Vector, Vector> stokes_projection(const Spaces& spaces, double Du,
                                            const VelocityField& u_exact,
                                            const ScalarFn& pi_exact,
                                            double tol = 1e-10);

/// Projects all initial fields; t = 0.
State init_state(const Spaces& spaces, const ModelParams& params,
                 const InitialData& initial, double tol = 1e-10);

/// One time step of the decoupled scheme: n, w, c solves, then the
/// velocity-pressure saddle problem, then the flux solve. Holds the constant
/// matrices, cached factorizations and precomputed separable loads, so a
/// Stepper is built once per (mesh, dt, params) and reused along the march.
class Stepper {
 public:
  Stepper(const Spaces& spaces, const ModelParams& params, double dt,
          const Forcing& forcing = {}, double tol = 1e-10);
  ~Stepper();
  Stepper(Stepper&&) noexcept;

  State advance(const State& prev);

  const Spaces& spaces() const;
  double dt() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot step with the documented solve order; wraps a throwaway Stepper.
State advance(const State& prev, double dt, const Spaces& spaces,
              const ModelParams& params, const Forcing& forcing = {},
              double tol = 1e-10);

/// Diagnostic L^{10/3} norms of s and c (the inductive-hypothesis monitor);
/// reported, never enforced.
std::pair<double, double> monitor_inductive_hypothesis(const Spaces& spaces,
                                                       const State& state);

struct SimulationConfig {
  int nx = 16, ny = 16;
  Rect bounds;
  double dt = 1e-3;
  double T = 1.0;
  ModelParams params;
  InitialData initial;
  Forcing forcing;
  std::vector<double> snapshot_times;
  double solver_tol = 1e-10;
};

struct TrajectoryRow {
  double t;
  double int_n, int_w, int_c;  // lumped integrals of the scalar fields
  double l2_u;                 // L2 norm of the velocity
  double s_l103, c_l103;       // inductive-hypothesis monitor
};

struct Snapshot {
  double t;
  State state;
};

struct TrajectorySummary {
  std::vector<TrajectoryRow> rows;  // one per step, m = 1..N
  std::vector<Snapshot> snapshots;
};

/// Marches N = T/dt steps and records per-step totals; snapshots are taken at
/// the first step time reaching each requested instant (0 keeps the initial
/// state). Throws on the failing equation; the caller owns partial output.
TrajectorySummary run_simulation(const Mesh& mesh, const SimulationConfig& config);

}  // namespace ctns
