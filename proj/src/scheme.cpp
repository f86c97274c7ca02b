#include "ctns/scheme.hpp"

#include <cmath>

#include "ctns/quadrature.hpp"
#include "ctns/saddle.hpp"

namespace ctns {

void ModelParams::validate() const {
  if (!(Dn > 0) || !(Dw > 0) || !(Dc > 0) || !(Du > 0)) {
    throw SchemeError("diffusion coefficients must be positive");
  }
  for (double v : {chi1, chi2, mu1, mu2, a1, a2, alpha, beta, gamma, lambda, k}) {
    if (v < 0) throw SchemeError("rate coefficients must be nonnegative");
  }
}

namespace {

// b_i = (grad f, grad phi_i) + (f, phi_i) over the scalar space.
Vector scalar_projection_rhs(const FeSpace& space, const ScalarField& f) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = assembly_rule(space);
  Vector b = Vector::Zero(space.dof_count());
  double vals[4];
  Eigen::Vector2d grads[4];
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double s = 2.0 * mesh.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      shape_values(space, rule.points[q], vals);
      shape_gradients(space, t, rule.points[q], grads);
      const Eigen::Vector2d p = mesh.point(t, rule.points[q]);
      const double fv = f.value(p);
      const Eigen::Vector2d fg = f.gradient(p);
      const double w = s * rule.weights[q];
      for (int i = 0; i < space.shapes_per_component(); ++i) {
        b[space.global_dof(t, i)] += w * (fg.dot(grads[i]) + fv * vals[i]);
      }
    }
  }
  return b;
}

// b_i = (div f, div Phi_i) + (rot f, rot Phi_i) + (f, Phi_i) on the flux space.
Vector flux_projection_rhs(const FeSpace& space, const FluxField& f) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = assembly_rule(space);
  Vector b = Vector::Zero(space.dof_count());
  double vals[4];
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& gl = mesh.geometry(t).grad_lambda;
    const double s = 2.0 * mesh.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      shape_values(space, rule.points[q], vals);
      const Eigen::Vector2d p = mesh.point(t, rule.points[q]);
      const double div = f.divergence(p);
      const double curl = f.curl(p);
      const Eigen::Vector2d fv = f.value(p);
      const double w = s * rule.weights[q];
      for (int i = 0; i < 3; ++i) {
        // component x: div = dx(lambda_i), rot = -dy(lambda_i)
        b[space.global_dof(t, i)] +=
            w * (div * gl(0, i) - curl * gl(1, i) + fv.x() * vals[i]);
        // component y: div = dy(lambda_i), rot = dx(lambda_i)
        b[space.global_dof(t, 3 + i)] +=
            w * (div * gl(1, i) + curl * gl(0, i) + fv.y() * vals[i]);
      }
    }
  }
  return b;
}

void zero_constrained(Vector& b, const std::vector<DirichletConstraint>& cs) {
  for (const auto& c : cs) b[c.dof] = c.value;
}

// Cached-factorization solver: tries the Krylov path against the last
// factorized matrix, refactorizes when the iteration stalls.
struct EquationSolver {
  SparseLuSolver lu;
  bool have = false;
  double tol = 1e-10;
  int krylov_iters = 12;
  const char* name = "";

  Vector solve(const SparseMatrix& A, const Vector& b) {
    if (have) {
      if (auto x = krylov_solve(A, lu, b, tol, krylov_iters)) return *x;
    }
    lu.factorize(A);
    have = true;
    Vector x = lu.solve(b);
    const double bnorm = b.norm();
    double res = (b - A * x).norm();
    for (int it = 0; it < 3 && res > tol * bnorm; ++it) {
      x += lu.solve(b - A * x);
      res = (b - A * x).norm();
    }
    if (res > tol * bnorm) {
      throw SchemeError(std::string(name) + ": solver failure, residual " +
                        std::to_string(res));
    }
    return x;
  }
};

// Per-step source loads; precomputed when the forcing separates in time.
struct LoadCache {
  std::vector<std::pair<double, Vector>> terms;  // (rate, load vector)
  bool active = false;

  template <typename FnList>
  void build(const FeSpace& space, const FnList& parts) {
    for (const auto& p : parts) {
      if constexpr (std::is_same_v<std::decay_t<decltype(p.g)>, ScalarFn>) {
        const TimeScalarFn f = [&p](double, const Eigen::Vector2d& x) { return p.g(x); };
        terms.emplace_back(p.rate, load_vector(space, f, 0.0));
      } else {
        const TimeVectorFn f = [&p](double, const Eigen::Vector2d& x) { return p.g(x); };
        terms.emplace_back(p.rate, load_vector(space, f, 0.0));
      }
    }
    active = !terms.empty();
  }

  void add_to(Vector& b, double t) const {
    for (const auto& [rate, vec] : terms) b += std::exp(-rate * t) * vec;
  }
};

}  // namespace

Vector elliptic_projection(const FeSpace& space, const ScalarField& exact) {
  if (space.components() != 1) {
    throw SchemeError("elliptic_projection: scalar overload needs a scalar space");
  }
  SparseMatrix A = stiffness_matrix(space, 1.0) + mass_matrix(space);
  return solve(LinearSystem{std::move(A), scalar_projection_rhs(space, exact), {}});
}

Vector elliptic_projection(const FeSpace& space, const FluxField& exact) {
  if (space.kind() != SpaceKind::VectorP1NormalTrace) {
    throw SchemeError("elliptic_projection: flux overload needs the flux space");
  }
  SparseMatrix A = divdiv_rotrot_matrix(space, 1.0) + mass_matrix(space);
  Vector x = solve(LinearSystem{std::move(A), flux_projection_rhs(space, exact),
                                space.constraints()});
  zero_constrained(x, space.constraints());
  return x;
}

std::pair<Vector, Vector> stokes_projection(const Spaces& spaces, double Du,
                                            const VelocityField& u_exact,
                                            const ScalarFn& pi_exact, double tol) {
  const FeSpace& vel = spaces.velocity;
  const FeSpace& pres = spaces.pressure;
  const Mesh& mesh = *spaces.mesh;

  // velocity rows: Du (grad u, grad Phi_i) - (pi, div Phi_i);
  // pressure rows: (div u, psi_j)
  Vector bu = Vector::Zero(vel.dof_count());
  Vector bp = Vector::Zero(pres.dof_count());
  const QuadratureRule& rule = assembly_rule(vel);
  double vals[4];
  Eigen::Vector2d grads[4];
  const int ns = vel.shapes_per_component();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double s = 2.0 * mesh.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      shape_values(vel, rule.points[q], vals);
      shape_gradients(vel, t, rule.points[q], grads);
      const Eigen::Vector2d p = mesh.point(t, rule.points[q]);
      const Eigen::Matrix2d J = u_exact.jacobian(p);
      const double pi = pi_exact ? pi_exact(p) : 0.0;
      const double w = s * rule.weights[q];
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < ns; ++i) {
          bu[vel.global_dof(t, c * ns + i)] +=
              w * (Du * J.row(c).dot(grads[i]) - pi * grads[i][c]);
        }
      }
      const double div = J.trace();
      for (int j = 0; j < 3; ++j) {
        bp[pres.global_dof(t, j)] += w * div * vals[j];
      }
    }
  }

  SaddleSolver stokes(vel, pres, 0.0, Du, 0.0, tol);
  auto res = stokes.solve(Vector(), bu, bp);
  return {std::move(res.u), std::move(res.p)};
}

State init_state(const Spaces& spaces, const ModelParams& params,
                 const InitialData& initial, double tol) {
  params.validate();
  if (!initial.n0.value || !initial.w0.value || !initial.c0.value ||
      !initial.s0.value || !initial.u0.value) {
    throw SchemeError("init_state: incomplete initial data");
  }
  State st;
  st.step = 0;
  st.time = 0.0;
  st.n = elliptic_projection(spaces.scalar, initial.n0);
  st.w = elliptic_projection(spaces.scalar, initial.w0);
  st.c = elliptic_projection(spaces.scalar, initial.c0);
  st.s = elliptic_projection(spaces.flux, initial.s0);
  std::tie(st.u, st.pi) =
      stokes_projection(spaces, params.Du, initial.u0, initial.pi0, tol);
  return st;
}

struct Stepper::Impl {
  const Spaces* sp;
  ModelParams params;
  double dt, tol;
  Forcing forcing;

  SparseMatrix M_scalar, M_flux, M_u;
  SparseLuSolver s_lu;      // constant flux system, factored once
  SparseMatrix s_system;    // kept for residual checks
  std::optional<SaddleSolver> saddle;
  EquationSolver n_solver, w_solver, c_solver;
  LoadCache cache_n, cache_w, cache_c, cache_s, cache_u;

  Impl(const Spaces& spaces, const ModelParams& p, double dt_, const Forcing& f,
       double tol_)
      : sp(&spaces), params(p), dt(dt_), tol(tol_), forcing(f) {
    params.validate();
    if (!(dt > 0)) throw SchemeError("time step must be positive");

    M_scalar = mass_matrix(spaces.scalar);
    M_flux = mass_matrix(spaces.flux);
    M_u = mass_matrix(spaces.velocity);

    s_system = SparseMatrix(M_flux / dt) + divdiv_rotrot_matrix(spaces.flux, params.Dc);
    LinearSystem ssys{s_system, Vector::Zero(spaces.flux.dof_count()),
                      spaces.flux.constraints()};
    ssys = apply_constraints(std::move(ssys));
    s_system = std::move(ssys.A);
    s_lu.factorize(s_system);

    saddle.emplace(spaces.velocity, spaces.pressure, 1.0 / dt, params.Du, params.k,
                   tol);

    n_solver = {};  n_solver.tol = tol;  n_solver.name = "n-solve";
    w_solver = {};  w_solver.tol = tol;  w_solver.name = "w-solve";
    c_solver = {};  c_solver.tol = tol;  c_solver.name = "c-solve";

    if (forcing.present() && forcing.separable()) {
      cache_n.build(spaces.scalar, forcing.sep_Fn);
      cache_w.build(spaces.scalar, forcing.sep_Fw);
      cache_c.build(spaces.scalar, forcing.sep_Fc);
      cache_s.build(spaces.flux, forcing.sep_Fs);
      cache_u.build(spaces.velocity, forcing.sep_Fu);
    }
  }

  Vector scalar_load(const LoadCache& cache, const TimeScalarFn& f, double t) const {
    Vector b = Vector::Zero(sp->scalar.dof_count());
    if (cache.active) {
      cache.add_to(b, t);
    } else if (f) {
      b = load_vector(sp->scalar, f, t);
    }
    return b;
  }

  State advance(const State& prev) {
    const double t_new = (prev.step + 1) * dt;
    const ModelParams& P = params;
    const FeSpace& S = sp->scalar;
    const FieldFunction u_prev{sp->velocity, prev.u};
    const FieldFunction s_prev{sp->flux, prev.s};

    // a) species n, implicit with lagged transport/chemotaxis data
    SparseMatrix An = scalar_system_matrix(
        S, 1.0 / dt - P.mu1, P.Dn, &u_prev,
        {{P.mu1, &prev.n}, {P.mu1 * P.a1, &prev.w}}, P.chi1, &s_prev);
    Vector bn = M_scalar * prev.n / dt + scalar_load(cache_n, forcing.Fn, t_new);
    const Vector n_new = n_solver.solve(An, bn);

    // b) species w
    SparseMatrix Aw = scalar_system_matrix(
        S, 1.0 / dt - P.mu2, P.Dw, &u_prev,
        {{P.mu2 * P.a2, &prev.n}, {P.mu2, &prev.w}}, P.chi2, &s_prev);
    Vector bw = M_scalar * prev.w / dt + scalar_load(cache_w, forcing.Fw, t_new);
    const Vector w_new = w_solver.solve(Aw, bw);

    // d) chemical, consuming the new truncated densities, transported by the
    // old velocity
    SparseMatrix Ac = scalar_system_matrix(
        S, 1.0 / dt, P.Dc, &u_prev, {{P.alpha, &n_new}, {P.beta, &w_new}}, 0.0,
        nullptr);
    Vector bc = M_scalar * prev.c / dt + scalar_load(cache_c, forcing.Fc, t_new);
    const Vector c_new = c_solver.solve(Ac, bc);

    // e), f) velocity-pressure saddle problem with the new densities
    const SparseMatrix block =
        momentum_block(sp->velocity, 1.0 / dt, P.Du, P.k, &u_prev);
    Vector bu = M_u * prev.u / dt;
    if (P.grad_phi && (P.gamma != 0.0 || P.lambda != 0.0)) {
      bu += buoyancy_rhs(sp->velocity, {S, n_new}, {S, w_new}, P.gamma, P.lambda,
                         P.grad_phi);
    }
    if (cache_u.active) {
      cache_u.add_to(bu, t_new);
    } else if (forcing.Fu) {
      bu += load_vector(sp->velocity, forcing.Fu, t_new);
    }
    const SparseMatrix Asaddle = saddle.assemble(block);
    const Vector bsaddle = saddle.assemble_rhs(bu);
    const Vector x = u_solver.solve(Asaddle, bsaddle);
    Vector u_new = x.head(saddle.nu);
    zero_constrained(u_new, sp->velocity.constraints());
    const Vector pi_new = x.segment(saddle.nu, saddle.np);

    // c) flux, driven by the new velocity and densities
    Vector bs = M_flux * prev.s / dt +
                flux_rhs(sp->flux, {sp->velocity, u_new}, s_prev, {S, n_new},
                         {S, w_new}, {S, prev.c}, P.alpha, P.beta);
    if (cache_s.active) {
      cache_s.add_to(bs, t_new);
    } else if (forcing.Fs) {
      bs += load_vector(sp->flux, forcing.Fs, t_new);
    }
    zero_constrained(bs, sp->flux.constraints());
    Vector s_new = s_lu.solve(bs);
    {
      const double bnorm = bs.norm();
      double res = (bs - s_system * s_new).norm();
      for (int it = 0; it < 3 && res > tol * bnorm; ++it) {
        s_new += s_lu.solve(bs - s_system * s_new);
        res = (bs - s_system * s_new).norm();
      }
      if (res > tol * bnorm) {
        throw SchemeError("s-solve: solver failure, residual " + std::to_string(res));
      }
    }
    zero_constrained(s_new, sp->flux.constraints());

    State next;
    next.step = prev.step + 1;
    next.time = t_new;
    next.n = n_new;
    next.w = w_new;
    next.c = c_new;
    next.s = s_new;
    next.u = u_new;
    next.pi = pi_new;
    return next;
  }
};

Stepper::Stepper(const Spaces& spaces, const ModelParams& params, double dt,
                 const Forcing& forcing, double tol)
    : impl_(std::make_unique<Impl>(spaces, params, dt, forcing, tol)) {}
Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;

State Stepper::advance(const State& prev) {
  if (prev.n.size() != impl_->sp->scalar.dof_count() ||
      prev.s.size() != impl_->sp->flux.dof_count() ||
      prev.u.size() != impl_->sp->velocity.dof_count()) {
    throw SchemeError("advance: state does not match the discrete spaces");
  }
  return impl_->advance(prev);
}

const Spaces& Stepper::spaces() const { return *impl_->sp; }
double Stepper::dt() const { return impl_->dt; }

State advance(const State& prev, double dt, const Spaces& spaces,
              const ModelParams& params, const Forcing& forcing, double tol) {
  Stepper stepper(spaces, params, dt, forcing, tol);
  return stepper.advance(prev);
}

std::pair<double, double> monitor_inductive_hypothesis(const Spaces& spaces,
                                                       const State& state) {
  const Mesh& mesh = *spaces.mesh;
  const QuadratureRule& rule = triangle_quadrature(5);
  const double p = 10.0 / 3.0;
  double int_s = 0.0, int_c = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double s = 2.0 * mesh.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      const double w = s * rule.weights[q];
      int_s += w * std::pow(eval_vector(spaces.flux, state.s, t, rule.points[q]).norm(), p);
      int_c += w * std::pow(std::abs(eval_scalar(spaces.scalar, state.c, t, rule.points[q])), p);
    }
  }
  return {std::pow(int_s, 1.0 / p), std::pow(int_c, 1.0 / p)};
}

TrajectorySummary run_simulation(const Mesh& mesh, const SimulationConfig& config) {
  (void)mesh;  // spaces carry the mesh reference; kept for call-site clarity
  if (!(config.T > 0)) throw SchemeError("run_simulation: final time must be positive");
  const Spaces spaces(mesh);
  const long long N = std::max(1LL, std::llround(config.T / config.dt));

  State state = init_state(spaces, config.params, config.initial, config.solver_tol);
  Stepper stepper(spaces, config.params, config.dt, config.forcing, config.solver_tol);

  const TimeScalarFn one = [](double, const Eigen::Vector2d&) { return 1.0; };
  const Vector phi_integrals = load_vector(spaces.scalar, one, 0.0);
  const SparseMatrix M_u = mass_matrix(spaces.velocity);

  std::vector<double> wanted = config.snapshot_times;
  std::sort(wanted.begin(), wanted.end());
  std::size_t next_snap = 0;

  TrajectorySummary out;
  out.rows.reserve(static_cast<std::size_t>(N));
  while (next_snap < wanted.size() && wanted[next_snap] <= 0.0) {
    out.snapshots.push_back({0.0, state});
    ++next_snap;
  }

  for (long long m = 1; m <= N; ++m) {
    state = stepper.advance(state);
    const auto [s_norm, c_norm] = monitor_inductive_hypothesis(spaces, state);
    out.rows.push_back({state.time, phi_integrals.dot(state.n),
                        phi_integrals.dot(state.w), phi_integrals.dot(state.c),
                        std::sqrt(state.u.dot(M_u * state.u)), s_norm, c_norm});
    while (next_snap < wanted.size() &&
           state.time >= wanted[next_snap] - 0.5 * config.dt) {
      out.snapshots.push_back({state.time, state});
      ++next_snap;
    }
  }
  return out;
}

}  // namespace ctns
