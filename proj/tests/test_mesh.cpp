#include <doctest.h>

#include <map>
#include <random>

#include "ctns/mesh.hpp"

using namespace ctns;

TEST_CASE("smallest grid") {
  const Mesh m = generate_rect_mesh(1, 1);
  CHECK(m.vertex_count() == 4);
  CHECK(m.triangle_count() == 2);
  CHECK(m.boundary_edges().size() == 4);
}

TEST_CASE("10x10 grid counts and area partition") {
  const Mesh m = generate_rect_mesh(10, 10);
  CHECK(m.vertex_count() == 121);
  CHECK(m.triangle_count() == 200);
  CHECK(m.boundary_edges().size() == 40);  // 2(nx+ny)
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("element geometry of the unit right triangle") {
  const auto g = element_geometry({0, 0}, {1, 0}, {0, 1});
  CHECK(g.area == doctest::Approx(0.5));
  CHECK(g.grad_lambda.col(0).isApprox(Eigen::Vector2d(-1, -1), 1e-14));
  CHECK(g.grad_lambda.col(1).isApprox(Eigen::Vector2d(1, 0), 1e-14));
  CHECK(g.grad_lambda.col(2).isApprox(Eigen::Vector2d(0, 1), 1e-14));
  // lambda_i(v_j) = delta_ij via affine reconstruction
  const Eigen::Vector2d verts[3] = {{0, 0}, {1, 0}, {0, 1}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double lam =
          (i == 0 ? 1.0 : 0.0) + g.grad_lambda.col(i).dot(verts[j] - verts[0]);
      CHECK(lam == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("collinear vertices are rejected") {
  CHECK_THROWS_AS(element_geometry({0, 0}, {1, 0}, {2, 0}), MeshError);
}

TEST_CASE("invalid construction requests") {
  CHECK_THROWS_AS(generate_rect_mesh(0, 1), MeshError);
  CHECK_THROWS_AS(generate_rect_mesh(1, -2), MeshError);
  CHECK_THROWS_AS(generate_rect_mesh(2, 2, Rect{0, 0, 0, 1}), MeshError);
}

TEST_CASE("gradient sums vanish and areas tile the domain") {
  const Rect r{-0.3, 2.1, 0.5, 1.7};
  for (int n : {1, 3, 7, 12}) {
    const Mesh m = generate_rect_mesh(n, n + 2, r);
    double area = 0.0;
    for (int t = 0; t < m.triangle_count(); ++t) {
      const auto& g = m.geometry(t);
      CHECK((g.grad_lambda.col(0) + g.grad_lambda.col(1) + g.grad_lambda.col(2))
                .norm() <= 1e-13);
      area += g.area;
    }
    CHECK(area == doctest::Approx(r.area()).epsilon(1e-12));
  }
}

TEST_CASE("boundary edges lie on the bounds exactly and corners carry two tags") {
  const Rect r{0, 2, 0, 1};
  const Mesh m = generate_rect_mesh(4, 3, r);
  for (const auto& e : m.boundary_edges()) {
    for (int v : {e.v0, e.v1}) {
      const auto& p = m.vertex(v);
      switch (e.side) {
        case side_left: CHECK(p.x() == r.xmin); break;
        case side_right: CHECK(p.x() == r.xmax); break;
        case side_bottom: CHECK(p.y() == r.ymin); break;
        case side_top: CHECK(p.y() == r.ymax); break;
      }
    }
  }
  int corners = 0;
  for (int v = 0; v < m.vertex_count(); ++v) {
    const int bits = __builtin_popcount(m.vertex_sides(v));
    CHECK(bits <= 2);
    if (bits == 2) ++corners;
  }
  CHECK(corners == 4);
}

TEST_CASE("edge incidence: boundary edges in one triangle, interior in two") {
  const Mesh m = generate_rect_mesh(5, 4);
  std::map<std::pair<int, int>, int> edge_count;
  const auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangle(t);
    for (int i = 0; i < 3; ++i) {
      edge_count[key(tri[i], tri[(i + 1) % 3])] += 1;
    }
  }
  for (const auto& e : m.boundary_edges()) {
    CHECK(edge_count.at(key(e.v0, e.v1)) == 1);
  }
  std::size_t n_boundary = 0;
  for (const auto& [k, cnt] : edge_count) {
    CHECK((cnt == 1 || cnt == 2));
    if (cnt == 1) ++n_boundary;
  }
  CHECK(n_boundary == m.boundary_edges().size());
}

TEST_CASE("regeneration is bit-identical") {
  const Mesh a = generate_rect_mesh(6, 9, Rect{0.1, 1.9, -0.2, 0.8});
  const Mesh b = generate_rect_mesh(6, 9, Rect{0.1, 1.9, -0.2, 0.8});
  REQUIRE(a.vertex_count() == b.vertex_count());
  for (int v = 0; v < a.vertex_count(); ++v) {
    CHECK(a.vertex(v).x() == b.vertex(v).x());
    CHECK(a.vertex(v).y() == b.vertex(v).y());
  }
  REQUIRE(a.triangle_count() == b.triangle_count());
  for (int t = 0; t < a.triangle_count(); ++t) {
    CHECK(a.triangle(t) == b.triangle(t));
    CHECK(a.geometry(t).area == b.geometry(t).area);
  }
}
