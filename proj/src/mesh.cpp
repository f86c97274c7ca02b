#include "ctns/mesh.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace ctns {

ElementGeometry element_geometry(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                 const Eigen::Vector2d& c) {
  const double twice_area =
      (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  const double scale =
      std::max({a.norm(), b.norm(), c.norm(), 1e-300});
  if (twice_area <= 1e-14 * scale * scale) {
    throw MeshError("degenerate element: vertices are collinear or clockwise");
  }
  ElementGeometry g;
  g.area = 0.5 * twice_area;
  // grad(lambda_i) is the inward normal of the opposite edge over 2|K|.
  g.grad_lambda.col(0) = Eigen::Vector2d(b.y() - c.y(), c.x() - b.x()) / twice_area;
  g.grad_lambda.col(1) = Eigen::Vector2d(c.y() - a.y(), a.x() - c.x()) / twice_area;
  g.grad_lambda.col(2) = Eigen::Vector2d(a.y() - b.y(), b.x() - a.x()) / twice_area;
  return g;
}

Mesh::Mesh(std::vector<Eigen::Vector2d> vertices,
           std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryEdge> boundary_edges, Rect bounds)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      bounds_(bounds) {
  geometry_.reserve(triangles_.size());
  for (const auto& tri : triangles_) {
    geometry_.push_back(
        element_geometry(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]));
    total_area_ += geometry_.back().area;
  }
  vertex_sides_.assign(vertices_.size(), 0);
  for (const auto& e : boundary_edges_) {
    vertex_sides_[e.v0] |= e.side;
    vertex_sides_[e.v1] |= e.side;
  }
}

Mesh generate_rect_mesh(int nx, int ny, const Rect& bounds) {
  if (nx < 1 || ny < 1) {
    throw MeshError("generate_rect_mesh: cell counts must be positive");
  }
  if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0)) {
    throw MeshError("generate_rect_mesh: degenerate bounds");
  }

  std::vector<Eigen::Vector2d> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Endpoints are taken from the bounds exactly so boundary vertices
      // compare equal to the rectangle coordinates.
      const double x = (i == nx) ? bounds.xmax
                                 : bounds.xmin + bounds.width() * i / nx;
      const double y = (j == ny) ? bounds.ymax
                                 : bounds.ymin + bounds.height() * j / ny;
      vertices.emplace_back(x, y);
    }
  }
  const auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      // Split along the lower-left to upper-right diagonal, both CCW.
      triangles.push_back({v00, v10, v11});
      triangles.push_back({v00, v11, v01});
    }
  }

  std::vector<BoundaryEdge> edges;
  edges.reserve(2 * static_cast<std::size_t>(nx + ny));
  for (int i = 0; i < nx; ++i) {
    edges.push_back({vid(i, 0), vid(i + 1, 0), side_bottom});
    edges.push_back({vid(i, ny), vid(i + 1, ny), side_top});
  }
  for (int j = 0; j < ny; ++j) {
    edges.push_back({vid(0, j), vid(0, j + 1), side_left});
    edges.push_back({vid(nx, j), vid(nx, j + 1), side_right});
  }

  return Mesh(std::move(vertices), std::move(triangles), std::move(edges), bounds);
}

}  // namespace ctns
