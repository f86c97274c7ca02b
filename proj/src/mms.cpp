#include "ctns/mms.hpp"

#include <cmath>

namespace ctns {
namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Shared trig state of the manufactured fields at one (t, p).
struct Frame {
  double E;            // e^-t
  double sx, cx, sy, cy;
  Frame(double t, const Eigen::Vector2d& p)
      : E(std::exp(-t)),
        sx(std::sin(kTwoPi * p.x())),
        cx(std::cos(kTwoPi * p.x())),
        sy(std::sin(kTwoPi * p.y())),
        cy(std::cos(kTwoPi * p.y())) {}
};

double n_of(const Frame& f) { return f.E * (f.cx + f.cy + 3.0); }
double w_of(const Frame& f) { return f.E * (f.cy - f.cx + 6.0); }
Eigen::Vector2d grad_n(const Frame& f) {
  return kTwoPi * f.E * Eigen::Vector2d(-f.sx, -f.sy);
}
Eigen::Vector2d grad_w(const Frame& f) {
  return kTwoPi * f.E * Eigen::Vector2d(f.sx, -f.sy);
}
double lap_n(const Frame& f) { return -kTwoPi * kTwoPi * f.E * (f.cx + f.cy); }
double lap_w(const Frame& f) { return kTwoPi * kTwoPi * f.E * (f.cx - f.cy); }

double c_of(const Frame& f, const Eigen::Vector2d& p) {
  return f.E * (f.sy + f.cx - kTwoPi * p.y() + 9.0);
}
Eigen::Vector2d s_of(const Frame& f) {
  return kTwoPi * f.E * Eigen::Vector2d(-f.sx, f.cy - 1.0);
}
double lap_c(const Frame& f) { return -kTwoPi * kTwoPi * f.E * (f.cx + f.sy); }

Eigen::Vector2d u_of(const Frame& f) {
  return f.E * Eigen::Vector2d(f.sy * (f.cx - 1.0), f.sx * (1.0 - f.cy));
}
Eigen::Matrix2d jac_u(const Frame& f) {
  Eigen::Matrix2d J;  // J(c, d) = d u_c / d x_d
  J(0, 0) = -kTwoPi * f.E * f.sy * f.sx;
  J(0, 1) = kTwoPi * f.E * f.cy * (f.cx - 1.0);
  J(1, 0) = kTwoPi * f.E * f.cx * (1.0 - f.cy);
  J(1, 1) = kTwoPi * f.E * f.sx * f.sy;
  return J;
}
Eigen::Vector2d lap_u(const Frame& f) {
  const double w2 = kTwoPi * kTwoPi;
  return w2 * f.E * Eigen::Vector2d(-f.sy * (2.0 * f.cx - 1.0),
                                    f.sx * (2.0 * f.cy - 1.0));
}
double pi_of(const Frame& f) { return f.E * (f.sy + f.cx); }
Eigen::Vector2d grad_pi(const Frame& f) {
  return kTwoPi * f.E * Eigen::Vector2d(-f.sx, f.cy);
}

// Spatial Jacobian of s (the Hessian of c); diagonal for this solution.
Eigen::Matrix2d jac_s(const Frame& f) {
  const double w2 = kTwoPi * kTwoPi;
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
  J(0, 0) = -w2 * f.E * f.cx;
  J(1, 1) = -w2 * f.E * f.sy;
  return J;
}
Eigen::Vector2d grad_lap_c(const Frame& f) {
  const double w3 = kTwoPi * kTwoPi * kTwoPi;
  return w3 * f.E * Eigen::Vector2d(f.sx, -f.cy);
}

}  // namespace

ExactValues test2_exact(double t, const Eigen::Vector2d& p) {
  const Frame f(t, p);
  return {n_of(f), w_of(f), c_of(f, p), s_of(f), u_of(f), pi_of(f)};
}

VectorFn test2_grad_phi() {
  return [](const Eigen::Vector2d&) { return Eigen::Vector2d(0.0, -9.8); };
}

ModelParams test2_params() {
  ModelParams p;  // every coefficient 1
  p.grad_phi = test2_grad_phi();
  return p;
}

ForcingValues test2_forcing(double t, const Eigen::Vector2d& p) {
  const Frame f(t, p);
  const double n = n_of(f), w = w_of(f), c = c_of(f, p);
  const Eigen::Vector2d s = s_of(f), u = u_of(f);
  const Eigen::Matrix2d Ju = jac_u(f);

  ForcingValues F;
  // F_n = dt n + u.grad n - lap n + div(n s) - n (1 - n - w)
  F.Fn = -n + u.dot(grad_n(f)) - lap_n(f) + (grad_n(f).dot(s) + n * lap_c(f)) -
         n * (1.0 - n - w);
  F.Fw = -w + u.dot(grad_w(f)) - lap_w(f) + (grad_w(f).dot(s) + w * lap_c(f)) -
         w * (1.0 - n - w);
  // F_c = dt c + u.grad c - lap c + (n + w) c, with grad c = s
  F.Fc = -c + u.dot(s) - lap_c(f) + (n + w) * c;
  // F_s = grad F_c
  const Eigen::Vector2d grad_nw = kTwoPi * f.E * Eigen::Vector2d(0.0, -2.0 * f.sy);
  F.Fs = -s + (Ju.transpose() * s + jac_s(f) * u) - grad_lap_c(f) + c * grad_nw +
         (n + w) * s;
  // F_u = dt u + (u.grad) u - lap u - grad pi - (n + w) grad phi
  F.Fu = -u + Ju * u - lap_u(f) - grad_pi(f) -
         (n + w) * Eigen::Vector2d(0.0, -9.8);
  return F;
}

ScalarField test2_n(double t) {
  return {[t](const Eigen::Vector2d& p) { return n_of(Frame(t, p)); },
          [t](const Eigen::Vector2d& p) { return grad_n(Frame(t, p)); }};
}

ScalarField test2_w(double t) {
  return {[t](const Eigen::Vector2d& p) { return w_of(Frame(t, p)); },
          [t](const Eigen::Vector2d& p) { return grad_w(Frame(t, p)); }};
}

ScalarField test2_c(double t) {
  return {[t](const Eigen::Vector2d& p) { return c_of(Frame(t, p), p); },
          [t](const Eigen::Vector2d& p) { return s_of(Frame(t, p)); }};
}

FluxField test2_s(double t) {
  return {[t](const Eigen::Vector2d& p) { return s_of(Frame(t, p)); },
          [t](const Eigen::Vector2d& p) { return lap_c(Frame(t, p)); },
          [](const Eigen::Vector2d&) { return 0.0; }};
}

VelocityField test2_u(double t) {
  return {[t](const Eigen::Vector2d& p) { return u_of(Frame(t, p)); },
          [t](const Eigen::Vector2d& p) { return jac_u(Frame(t, p)); }};
}

ScalarField test2_u_component(double t, int comp) {
  return {[t, comp](const Eigen::Vector2d& p) { return u_of(Frame(t, p))[comp]; },
          [t, comp](const Eigen::Vector2d& p) {
            return Eigen::Vector2d(jac_u(Frame(t, p)).row(comp));
          }};
}

ScalarFn test2_pi(double t) {
  return [t](const Eigen::Vector2d& p) { return pi_of(Frame(t, p)); };
}

InitialData test2_initial_data() {
  InitialData d;
  d.n0 = test2_n(0.0);
  d.w0 = test2_w(0.0);
  d.c0 = test2_c(0.0);
  d.s0 = test2_s(0.0);
  d.u0 = test2_u(0.0);
  d.pi0 = test2_pi(0.0);
  return d;
}

Forcing test2_forcing_functions() {
  Forcing f;
  f.Fn = [](double t, const Eigen::Vector2d& p) { return test2_forcing(t, p).Fn; };
  f.Fw = [](double t, const Eigen::Vector2d& p) { return test2_forcing(t, p).Fw; };
  f.Fc = [](double t, const Eigen::Vector2d& p) { return test2_forcing(t, p).Fc; };
  f.Fs = [](double t, const Eigen::Vector2d& p) { return test2_forcing(t, p).Fs; };
  f.Fu = [](double t, const Eigen::Vector2d& p) { return test2_forcing(t, p).Fu; };

  // Every source is exactly e^-t L(x) + e^-2t Q(x) (linear and quadratic
  // terms of the system); L and Q follow from values at t = 0 and t = ln 2.
  const double ln2 = std::log(2.0);
  const auto scalar_parts = [ln2](auto pick) -> std::vector<Forcing::ScalarTerm> {
    const ScalarFn L = [pick, ln2](const Eigen::Vector2d& p) {
      return 4.0 * pick(test2_forcing(ln2, p)) - pick(test2_forcing(0.0, p));
    };
    const ScalarFn Q = [pick, ln2](const Eigen::Vector2d& p) {
      return 2.0 * pick(test2_forcing(0.0, p)) - 4.0 * pick(test2_forcing(ln2, p));
    };
    return {{1.0, L}, {2.0, Q}};
  };
  const auto vector_parts = [ln2](auto pick) -> std::vector<Forcing::VectorTerm> {
    const VectorFn L = [pick, ln2](const Eigen::Vector2d& p) {
      return Eigen::Vector2d(4.0 * pick(test2_forcing(ln2, p)) -
                             pick(test2_forcing(0.0, p)));
    };
    const VectorFn Q = [pick, ln2](const Eigen::Vector2d& p) {
      return Eigen::Vector2d(2.0 * pick(test2_forcing(0.0, p)) -
                             4.0 * pick(test2_forcing(ln2, p)));
    };
    return {{1.0, L}, {2.0, Q}};
  };
  f.sep_Fn = scalar_parts([](const ForcingValues& v) { return v.Fn; });
  f.sep_Fw = scalar_parts([](const ForcingValues& v) { return v.Fw; });
  f.sep_Fc = scalar_parts([](const ForcingValues& v) { return v.Fc; });
  f.sep_Fs = vector_parts([](const ForcingValues& v) { return v.Fs; });
  f.sep_Fu = vector_parts([](const ForcingValues& v) { return v.Fu; });
  return f;
}

ErrorPair spatial_error(const FeSpace& space, const Vector& coeffs,
                        const ScalarField& exact) {
  if (space.components() != 1) throw MmsError("spatial_error: expects a scalar space");
  if (coeffs.size() != space.dof_count()) throw MmsError("coefficient size mismatch");
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = triangle_quadrature(5);
  double l2 = 0.0, h1 = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double s = 2.0 * mesh.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d p = mesh.point(t, rule.points[q]);
      const double dv = exact.value(p) - eval_scalar(space, coeffs, t, rule.points[q]);
      const Eigen::Vector2d dg =
          exact.gradient(p) - eval_scalar_gradient(space, coeffs, t, rule.points[q]);
      l2 += s * rule.weights[q] * dv * dv;
      h1 += s * rule.weights[q] * dg.squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

ErrorPair velocity_component_error(const FeSpace& velocity, const Vector& coeffs,
                                   int comp, const ScalarField& exact) {
  if (velocity.components() != 2) {
    throw MmsError("velocity_component_error: expects a vector space");
  }
  if (coeffs.size() != velocity.dof_count()) throw MmsError("coefficient size mismatch");
  const Mesh& mesh = velocity.mesh();
  const QuadratureRule& rule = triangle_quadrature(5);
  double l2 = 0.0, h1 = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double s = 2.0 * mesh.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d p = mesh.point(t, rule.points[q]);
      const double dv =
          exact.value(p) - eval_vector(velocity, coeffs, t, rule.points[q])[comp];
      const Eigen::Vector2d dg =
          exact.gradient(p) -
          Eigen::Vector2d(
              eval_vector_jacobian(velocity, coeffs, t, rule.points[q]).row(comp));
      l2 += s * rule.weights[q] * dv * dv;
      h1 += s * rule.weights[q] * dg.squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

TimeNorms accumulate_norms(const std::vector<ErrorPair>& per_step, double dt) {
  if (per_step.empty()) throw MmsError("accumulate_norms: empty error sequence");
  TimeNorms out{0.0, 0.0, 0.0};
  double sum = 0.0;
  for (const auto& e : per_step) {
    const double h1_full2 = e.l2 * e.l2 + e.h1_semi * e.h1_semi;
    out.linf_l2 = std::max(out.linf_l2, e.l2);
    out.linf_h1 = std::max(out.linf_h1, std::sqrt(h1_full2));
    sum += h1_full2;
  }
  out.l2_h1 = std::sqrt(dt * sum);
  return out;
}

std::vector<double> convergence_orders(const std::vector<double>& errors,
                                       const std::vector<double>& resolutions) {
  if (errors.size() != resolutions.size() || errors.size() < 2) {
    throw MmsError("convergence_orders: need matching lists of length >= 2");
  }
  std::vector<double> orders;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (!(resolutions[i] > resolutions[i + 1])) {
      throw MmsError("convergence_orders: resolutions must be strictly decreasing");
    }
    if (errors[i] <= 0.0 || errors[i + 1] <= 0.0) {
      throw MmsError("convergence_orders: undefined order for zero error");
    }
    orders.push_back(std::log(errors[i] / errors[i + 1]) /
                     std::log(resolutions[i] / resolutions[i + 1]));
  }
  return orders;
}

std::vector<std::vector<double>> ErrorReport::orders() const {
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r + 1 < resolutions.size(); ++r) {
    std::vector<double> row;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      row.push_back(convergence_orders({errors[r][c], errors[r + 1][c]},
                                       {resolutions[r], resolutions[r + 1]})[0]);
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace ctns
