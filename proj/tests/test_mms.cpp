#include <doctest.h>

#include <cmath>
#include <random>

#include "ctns/mms.hpp"

using namespace ctns;

namespace {

std::mt19937& rng() {
  static std::mt19937 gen(424242);
  return gen;
}

Eigen::Vector2d random_interior(double margin = 0.05) {
  std::uniform_real_distribution<double> u(margin, 1.0 - margin);
  return {u(rng()), u(rng())};
}

// ---------------------------------------------------------------------------
// Finite-difference residual oracle in extended precision. Everything below
// is built from field VALUES only; no closed-form derivative of the
// implementation is reused. h = 1e-5 with long double keeps the second
// differences at ~1e-8 accuracy.
// ---------------------------------------------------------------------------
namespace fd {

using LD = long double;
constexpr LD kH = 1e-5L;
const LD kW = 2.0L * 3.14159265358979323846264338327950288L;

LD En(LD t) { return expl(-t); }
LD n_(LD t, LD x, LD y) { return En(t) * (cosl(kW * x) + cosl(kW * y) + 3.0L); }
LD w_(LD t, LD x, LD y) { return En(t) * (cosl(kW * y) - cosl(kW * x) + 6.0L); }
LD c_(LD t, LD x, LD y) {
  return En(t) * (sinl(kW * y) + cosl(kW * x) - kW * y + 9.0L);
}
LD s1_(LD t, LD x, LD) { return kW * En(t) * (-sinl(kW * x)); }
LD s2_(LD t, LD, LD y) { return kW * En(t) * (cosl(kW * y) - 1.0L); }
LD u1_(LD t, LD x, LD y) { return En(t) * sinl(kW * y) * (cosl(kW * x) - 1.0L); }
LD u2_(LD t, LD x, LD y) { return En(t) * sinl(kW * x) * (1.0L - cosl(kW * y)); }
LD pi_(LD t, LD x, LD y) { return En(t) * (sinl(kW * y) + cosl(kW * x)); }

template <typename F>
LD dt(F f, LD t, LD x, LD y) {
  return (f(t + kH, x, y) - f(t - kH, x, y)) / (2.0L * kH);
}
template <typename F>
LD dx(F f, LD t, LD x, LD y) {
  return (f(t, x + kH, y) - f(t, x - kH, y)) / (2.0L * kH);
}
template <typename F>
LD dy(F f, LD t, LD x, LD y) {
  return (f(t, x, y + kH) - f(t, x, y - kH)) / (2.0L * kH);
}
template <typename F>
LD lap(F f, LD t, LD x, LD y) {
  return (f(t, x + kH, y) + f(t, x - kH, y) + f(t, x, y + kH) + f(t, x, y - kH) -
          4.0L * f(t, x, y)) /
         (kH * kH);
}

LD Fn(LD t, LD x, LD y) {
  const LD n = n_(t, x, y), w = w_(t, x, y);
  const auto ns1 = [](LD t, LD x, LD y) { return n_(t, x, y) * s1_(t, x, y); };
  const auto ns2 = [](LD t, LD x, LD y) { return n_(t, x, y) * s2_(t, x, y); };
  return dt(n_, t, x, y) + u1_(t, x, y) * dx(n_, t, x, y) +
         u2_(t, x, y) * dy(n_, t, x, y) - lap(n_, t, x, y) + dx(ns1, t, x, y) +
         dy(ns2, t, x, y) - n * (1.0L - n - w);
}
LD Fw(LD t, LD x, LD y) {
  const LD n = n_(t, x, y), w = w_(t, x, y);
  const auto ws1 = [](LD t, LD x, LD y) { return w_(t, x, y) * s1_(t, x, y); };
  const auto ws2 = [](LD t, LD x, LD y) { return w_(t, x, y) * s2_(t, x, y); };
  return dt(w_, t, x, y) + u1_(t, x, y) * dx(w_, t, x, y) +
         u2_(t, x, y) * dy(w_, t, x, y) - lap(w_, t, x, y) + dx(ws1, t, x, y) +
         dy(ws2, t, x, y) - w * (1.0L - n - w);
}
LD Fc(LD t, LD x, LD y) {
  return dt(c_, t, x, y) + u1_(t, x, y) * dx(c_, t, x, y) +
         u2_(t, x, y) * dy(c_, t, x, y) - lap(c_, t, x, y) +
         (n_(t, x, y) + w_(t, x, y)) * c_(t, x, y);
}
LD Fu1(LD t, LD x, LD y) {
  return dt(u1_, t, x, y) + u1_(t, x, y) * dx(u1_, t, x, y) +
         u2_(t, x, y) * dy(u1_, t, x, y) - lap(u1_, t, x, y) - dx(pi_, t, x, y);
}
LD Fu2(LD t, LD x, LD y) {
  // includes -(n + w) * grad_phi_y with grad phi = (0, -9.8)
  return dt(u2_, t, x, y) + u1_(t, x, y) * dx(u2_, t, x, y) +
         u2_(t, x, y) * dy(u2_, t, x, y) - lap(u2_, t, x, y) - dy(pi_, t, x, y) +
         9.8L * (n_(t, x, y) + w_(t, x, y));
}

}  // namespace fd

}  // namespace

TEST_CASE("exact fields at the paper's reference point") {
  const ExactValues v = test2_exact(0.0, {0.0, 0.0});
  CHECK(v.n == doctest::Approx(5.0));
  CHECK(v.w == doctest::Approx(6.0));
  CHECK(v.c == doctest::Approx(10.0));
  CHECK(v.s.norm() <= 1e-14);
}

TEST_CASE("boundary identities of the closed forms") {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> ut(0.0, 2.0);
  for (int i = 0; i < 250; ++i) {  // 250 per side = 1000 samples
    const double a = u01(rng()), t = ut(rng());
    for (const Eigen::Vector2d& p :
         {Eigen::Vector2d(0.0, a), Eigen::Vector2d(1.0, a), Eigen::Vector2d(a, 0.0),
          Eigen::Vector2d(a, 1.0)}) {
      const ExactValues v = test2_exact(t, p);
      CHECK(v.u.norm() <= 1e-12);
      // s = grad c, so s.nu = dc/dnu; the same identity covers n and w whose
      // normal derivatives carry the same sine factors
      const bool vertical = (p.x() == 0.0 || p.x() == 1.0);
      const double normal_flux = vertical ? v.s.x() : v.s.y();
      CHECK(std::abs(normal_flux) <= 1e-12);
      const Eigen::Vector2d gn = test2_n(t).gradient(p);
      const Eigen::Vector2d gw = test2_w(t).gradient(p);
      CHECK(std::abs(vertical ? gn.x() : gn.y()) <= 1e-12);
      CHECK(std::abs(vertical ? gw.x() : gw.y()) <= 1e-12);
    }
  }
}

TEST_CASE("divergence-free velocity by finite differences") {
  const fd::LD h = 1e-6L;
  std::uniform_real_distribution<double> ut(0.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const fd::LD t = ut(rng());
    const Eigen::Vector2d p = random_interior();
    const fd::LD x = p.x(), y = p.y();
    const fd::LD dudx = (fd::u1_(t, x + h, y) - fd::u1_(t, x - h, y)) / (2 * h);
    const fd::LD dvdy = (fd::u2_(t, x, y + h) - fd::u2_(t, x, y - h)) / (2 * h);
    CHECK(std::abs(static_cast<double>(dudx + dvdy)) <=
          1e-10 * (1.0 + std::abs(static_cast<double>(dudx))));
  }
}

TEST_CASE("pressure has zero mean") {
  // 2D midpoint grid is plenty for the trig integrand
  const int N = 200;
  double sum = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      sum += test2_exact(0.3, {(i + 0.5) / N, (j + 0.5) / N}).pi;
    }
  }
  CHECK(std::abs(sum / (N * N)) <= 1e-10);
}

TEST_CASE("closed-form forcings match the finite-difference residual oracle") {
  std::uniform_real_distribution<double> ut(0.05, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double t = ut(rng());
    const Eigen::Vector2d p = random_interior();
    const ForcingValues F = test2_forcing(t, p);
    const fd::LD x = p.x(), y = p.y();
    CHECK(std::abs(F.Fn - static_cast<double>(fd::Fn(t, x, y))) <= 1e-5);
    CHECK(std::abs(F.Fw - static_cast<double>(fd::Fw(t, x, y))) <= 1e-5);
    CHECK(std::abs(F.Fc - static_cast<double>(fd::Fc(t, x, y))) <= 1e-5);
    CHECK(std::abs(F.Fu.x() - static_cast<double>(fd::Fu1(t, x, y))) <= 1e-5);
    CHECK(std::abs(F.Fu.y() - static_cast<double>(fd::Fu2(t, x, y))) <= 1e-5);
  }
}

TEST_CASE("F_s is the gradient of F_c") {
  const double h = 1e-5;
  std::uniform_real_distribution<double> ut(0.05, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double t = ut(rng());
    const Eigen::Vector2d p = random_interior();
    const double dFc_dx = (test2_forcing(t, {p.x() + h, p.y()}).Fc -
                           test2_forcing(t, {p.x() - h, p.y()}).Fc) /
                          (2 * h);
    const double dFc_dy = (test2_forcing(t, {p.x(), p.y() + h}).Fc -
                           test2_forcing(t, {p.x(), p.y() - h}).Fc) /
                          (2 * h);
    const ForcingValues F = test2_forcing(t, p);
    CHECK(std::abs(F.Fs.x() - dFc_dx) <= 1e-5);
    CHECK(std::abs(F.Fs.y() - dFc_dy) <= 1e-5);
  }
}

TEST_CASE("all forcings decay in time") {
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector2d p = random_interior();
    const ForcingValues F = test2_forcing(40.0, p);
    CHECK(std::abs(F.Fn) <= 1e-12);
    CHECK(std::abs(F.Fw) <= 1e-12);
    CHECK(std::abs(F.Fc) <= 1e-12);
    CHECK(F.Fs.norm() <= 1e-12);
    CHECK(F.Fu.norm() <= 1e-12);
  }
}

TEST_CASE("separable representation reproduces the forcing values") {
  const Forcing f = test2_forcing_functions();
  REQUIRE(f.separable());
  std::uniform_real_distribution<double> ut(0.0, 3.0);
  for (int i = 0; i < 30; ++i) {
    const double t = ut(rng());
    const Eigen::Vector2d p = random_interior();
    double fn = 0.0;
    for (const auto& term : f.sep_Fn) fn += std::exp(-term.rate * t) * term.g(p);
    CHECK(fn == doctest::Approx(f.Fn(t, p)).epsilon(1e-11));
    Eigen::Vector2d fs = Eigen::Vector2d::Zero();
    for (const auto& term : f.sep_Fs) fs += std::exp(-term.rate * t) * term.g(p);
    CHECK((fs - f.Fs(t, p)).norm() <= 1e-11 * (1.0 + fs.norm()));
  }
}

TEST_CASE("spatial error of the zero field is the exact L2 norm") {
  const Mesh m = generate_rect_mesh(32, 32);
  const FeSpace p1 = build_space(m, SpaceKind::ScalarP1);
  const Vector zero = Vector::Zero(p1.dof_count());
  const ErrorPair e = spatial_error(p1, zero, test2_n(0.0));
  CHECK(e.l2 == doctest::Approx(std::sqrt(10.0)).epsilon(1e-5));
}

TEST_CASE("matching constants give zero error") {
  const Mesh m = generate_rect_mesh(8, 8);
  const FeSpace p1 = build_space(m, SpaceKind::ScalarP1);
  const Vector c4 = Vector::Constant(p1.dof_count(), 4.0);
  const ScalarField exact{[](const Eigen::Vector2d&) { return 4.0; },
                          [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero(); }};
  const ErrorPair e = spatial_error(p1, c4, exact);
  CHECK(e.l2 <= 1e-13);
  CHECK(e.h1_semi <= 1e-13);
}

TEST_CASE("accumulated time norms") {
  // single step: the linf norms coincide with that step
  const ErrorPair single{0.25, 0.5};
  const TimeNorms one = accumulate_norms({single}, 0.1);
  CHECK(one.linf_l2 == doctest::Approx(0.25));
  CHECK(one.linf_h1 == doctest::Approx(std::hypot(0.25, 0.5)));

  // constant per-step full H1 error e over N steps: l2(H1) = e sqrt(T)
  const double e_l2 = 0.3, e_h1 = 0.4;
  const int N = 50;
  const double dt = 0.02;
  std::vector<ErrorPair> steps(N, {e_l2, e_h1});
  const TimeNorms norms = accumulate_norms(steps, dt);
  CHECK(norms.l2_h1 == doctest::Approx(0.5 * std::sqrt(N * dt)).epsilon(1e-13));

  // monotone decreasing: linf attained at the first step
  std::vector<ErrorPair> dec;
  for (int m = 1; m <= 10; ++m) dec.push_back({1.0 / m, 0.0});
  CHECK(accumulate_norms(dec, 0.1).linf_l2 == doctest::Approx(1.0));

  CHECK_THROWS_AS(accumulate_norms({}, 0.1), MmsError);
}

TEST_CASE("convergence orders reproduce Table 1's printed order") {
  const auto orders =
      convergence_orders({5.677008e-2, 2.227926e-2}, {1.0 / 10, 1.0 / 16});
  CHECK(std::abs(orders[0] - 1.9901) <= 5e-3);
}

TEST_CASE("convergence orders on synthetic sequences") {
  CHECK(convergence_orders({0.4, 0.2, 0.1}, {0.2, 0.1, 0.05})[0] ==
        doctest::Approx(1.0));
  CHECK(convergence_orders({0.4, 0.1}, {0.2, 0.1})[0] == doctest::Approx(2.0));
  // invariance under uniform scaling
  const auto a = convergence_orders({0.4, 0.17, 0.03}, {0.4, 0.2, 0.1});
  const auto b = convergence_orders({4.0, 1.7, 0.3}, {0.4, 0.2, 0.1});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]));

  CHECK_THROWS_AS(convergence_orders({0.1, 0.0}, {0.2, 0.1}), MmsError);
  CHECK_THROWS_AS(convergence_orders({0.1, 0.2}, {0.1, 0.2}), MmsError);
  CHECK_THROWS_AS(convergence_orders({0.1}, {0.1}), MmsError);
}
