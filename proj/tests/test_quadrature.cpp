#include <doctest.h>

#include <cmath>

#include "ctns/quadrature.hpp"

using namespace ctns;

namespace {

// Exact integral of x^p y^q over the reference triangle (0,0),(1,0),(0,1).
double monomial_integral(int p, int q) {
  auto fact = [](int n) {
    double r = 1.0;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
  };
  return fact(p) * fact(q) / fact(p + q + 2);
}

double integrate_monomial(const QuadratureRule& r, int p, int q) {
  double s = 0.0;
  for (int i = 0; i < r.size(); ++i) {
    const double x = r.points[i][1];  // lambda_2 is x on the reference triangle
    const double y = r.points[i][2];
    s += r.weights[i] * std::pow(x, p) * std::pow(y, q);
  }
  return s;
}

void check_exactness(const QuadratureRule& r) {
  for (int p = 0; p + 0 <= r.degree; ++p) {
    for (int q = 0; p + q <= r.degree; ++q) {
      CHECK(integrate_monomial(r, p, q) ==
            doctest::Approx(monomial_integral(p, q)).epsilon(1e-13));
    }
  }
}

}  // namespace

TEST_CASE("degree 1 is the centroid rule") {
  const auto r = triangle_quadrature(1);
  REQUIRE(r.size() == 1);
  CHECK(r.weights[0] == doctest::Approx(0.5));
  CHECK(r.points[0].isApprox(Eigen::Vector3d::Constant(1.0 / 3), 1e-15));
}

TEST_CASE("weights sum to the reference area") {
  for (int d : {1, 2, 3, 5}) {
    const auto r = triangle_quadrature(d);
    double s = 0.0;
    for (double w : r.weights) s += w;
    CHECK(s == doctest::Approx(0.5).epsilon(1e-15));
  }
  for (int d : {2, 4, 8, 10, 13}) {
    const auto r = collapsed_gauss_rule(d);
    double s = 0.0;
    for (double w : r.weights) s += w;
    CHECK(s == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("declared exactness holds on monomials") {
  for (int d : {1, 2, 3, 5}) check_exactness(triangle_quadrature(d));
  for (int d : {1, 3, 6, 8, 10}) check_exactness(collapsed_gauss_rule(d));
}

TEST_CASE("degree 5 rule integrates x^2 to 1/12") {
  CHECK(integrate_monomial(triangle_quadrature(5), 2, 0) ==
        doctest::Approx(1.0 / 12).epsilon(1e-14));
}

TEST_CASE("unsupported degree is rejected") {
  CHECK_THROWS_AS(triangle_quadrature(4), QuadratureError);
  CHECK_THROWS_AS(triangle_quadrature(0), QuadratureError);
}
