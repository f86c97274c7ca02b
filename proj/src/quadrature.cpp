#include "ctns/quadrature.hpp"

#include <cmath>

namespace ctns {
namespace {

void push(QuadratureRule& r, double l1, double l2, double l3, double w) {
  r.points.emplace_back(l1, l2, l3);
  r.weights.push_back(w);
}

// Adds all distinct permutations of (a, a, b).
void push_sym3(QuadratureRule& r, double a, double b, double w) {
  push(r, b, a, a, w);
  push(r, a, b, a, w);
  push(r, a, a, b, w);
}

// Gauss-Legendre nodes/weights on [0,1] via Newton iteration on P_n.
void gauss_legendre_unit(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess on [-1,1].
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 + t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

QuadratureRule triangle_quadrature(int degree) {
  QuadratureRule r;
  r.degree = degree;
  switch (degree) {
    case 1:
      push(r, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.5);
      break;
    case 2:
      push_sym3(r, 0.5, 0.0, 1.0 / 6);
      break;
    case 3:
      push(r, 1.0 / 3, 1.0 / 3, 1.0 / 3, -27.0 / 96);
      push_sym3(r, 0.2, 0.6, 25.0 / 96);
      break;
    case 5: {
      const double s = std::sqrt(15.0);
      push(r, 1.0 / 3, 1.0 / 3, 1.0 / 3, 9.0 / 80);
      const double a1 = (6.0 + s) / 21.0;
      push_sym3(r, a1, 1.0 - 2.0 * a1, (155.0 + s) / 2400.0);
      const double a2 = (6.0 - s) / 21.0;
      push_sym3(r, a2, 1.0 - 2.0 * a2, (155.0 - s) / 2400.0);
      break;
    }
    default:
      throw QuadratureError("triangle_quadrature: unsupported degree " +
                            std::to_string(degree));
  }
  return r;
}

QuadratureRule collapsed_gauss_rule(int degree) {
  if (degree < 0) throw QuadratureError("collapsed_gauss_rule: negative degree");
  // Map (xi, eta) in [0,1]^2 to lambda = (1-eta)(1-xi, xi) , eta.
  // A total-degree-d polynomial becomes degree <= d in xi and d+1 in eta.
  const int n_xi = degree / 2 + 1;
  const int n_eta = (degree + 1) / 2 + 1;
  std::vector<double> xs, wx, es, we;
  gauss_legendre_unit(n_xi, xs, wx);
  gauss_legendre_unit(n_eta, es, we);

  QuadratureRule r;
  r.degree = degree;
  for (int j = 0; j < n_eta; ++j) {
    for (int i = 0; i < n_xi; ++i) {
      const double eta = es[j], xi = xs[i];
      const double l3 = eta;
      const double l2 = xi * (1.0 - eta);
      push(r, 1.0 - l2 - l3, l2, l3, wx[i] * we[j] * (1.0 - eta));
    }
  }
  return r;
}

}  // namespace ctns
