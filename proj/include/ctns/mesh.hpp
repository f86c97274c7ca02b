#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ctns {

/// Error thrown for invalid mesh construction requests (non-positive cell
/// counts, degenerate bounds, collinear element vertices).
struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sides of an axis-aligned rectangular domain, usable as bitmask flags.
/// Corner vertices carry two flags.
enum Side : std::uint8_t {
  side_left = 1,
  side_right = 2,
  side_bottom = 4,
  side_top = 8,
};

/// Axis-aligned rectangle [xmin,xmax] x [ymin,ymax].
struct Rect {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
};

/// Precomputed affine data of one triangle: area and the (constant)
/// gradients of its three barycentric coordinates, stored column-wise.
struct ElementGeometry {
  double area = 0.0;
  Eigen::Matrix<double, 2, 3> grad_lambda = Eigen::Matrix<double, 2, 3>::Zero();
};

struct BoundaryEdge {
  int v0 = -1;
  int v1 = -1;
  Side side = side_left;
};

/// Conforming triangulation of a rectangle. Immutable after construction and
/// safe to share across concurrent readers.
class Mesh {
 public:
  Mesh(std::vector<Eigen::Vector2d> vertices,
       std::vector<std::array<int, 3>> triangles,
       std::vector<BoundaryEdge> boundary_edges, Rect bounds);

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int triangle_count() const { return static_cast<int>(triangles_.size()); }

  const Eigen::Vector2d& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const Rect& bounds() const { return bounds_; }

  /// Bitmask of Side flags of the boundary edges incident to vertex v;
  /// zero for interior vertices, two bits set at corners.
  std::uint8_t vertex_sides(int v) const { return vertex_sides_[v]; }
  bool is_boundary_vertex(int v) const { return vertex_sides_[v] != 0; }

  const ElementGeometry& geometry(int t) const { return geometry_[t]; }

  /// Maps a barycentric point of triangle t to physical coordinates.
  Eigen::Vector2d point(int t, const Eigen::Vector3d& bary) const {
    const auto& tri = triangles_[t];
    return bary[0] * vertices_[tri[0]] + bary[1] * vertices_[tri[1]] +
           bary[2] * vertices_[tri[2]];
  }

  double total_area() const { return total_area_; }

 private:
  std::vector<Eigen::Vector2d> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<std::uint8_t> vertex_sides_;
  std::vector<ElementGeometry> geometry_;
  Rect bounds_;
  double total_area_ = 0.0;
};

/// Area and barycentric-coordinate gradients of the triangle (a, b, c).
/// Throws MeshError if the vertices are collinear or the orientation is
/// negative.
ElementGeometry element_geometry(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                 const Eigen::Vector2d& c);

/// Uniform nx-by-ny grid of the rectangle, each cell split along the
/// lower-left to upper-right diagonal. Vertex (i,j) has index j*(nx+1)+i;
/// numbering is deterministic, so equal inputs produce identical meshes.
Mesh generate_rect_mesh(int nx, int ny, const Rect& bounds = Rect{});

}  // namespace ctns
