#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace plateopt {

using Point = Eigen::Vector2d;

/// Raised when a mesh file cannot be read. Carries the 1-based line number.
class MeshParseError : public std::runtime_error {
 public:
  MeshParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Raised for inverted, non-conforming or otherwise invalid triangulations.
/// `element()` is the offending triangle index (or -1 when not attributable).
class MeshTopologyError : public std::runtime_error {
 public:
  MeshTopologyError(int element, const std::string& what);
  int element() const { return element_; }

 private:
  int element_;
};

struct Edge {
  std::array<int, 2> vertices;   // vertices[0] < vertices[1]
  std::array<int, 2> triangles;  // triangles[1] == -1 on the boundary
  bool boundary() const { return triangles[1] < 0; }
};

/// Conforming triangulation of the unit square.
///
/// Immutable after construction. Edges are derived from the triangle list and
/// oriented from the lower to the higher vertex index; the edge normal is the
/// tangent rotated clockwise. Interior (non-boundary, used) vertices carry a
/// dense index used as the P1 degree of freedom.
class Mesh {
 public:
  /// Validates the triangulation. `h` overrides the geometric diameter for
  /// families where it is known in closed form.
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
       int level, std::optional<double> h = std::nullopt);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_interior_vertices() const { return static_cast<int>(interior_.size()); }

  const Point& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }

  /// Edge opposite local vertex `i` of triangle `t`.
  int triangle_edge(int t, int i) const { return triangle_edges_[t][i]; }
  /// +1 when the normal of `triangle_edge(t, i)` points out of `t`.
  int edge_sign(int t, int i) const { return edge_signs_[t][i]; }

  double area(int t) const { return areas_[t]; }
  Point centroid(int t) const;
  std::array<Point, 3> corners(int t) const;
  Point map(int t, const Eigen::Vector3d& bary) const;
  /// Barycentric coordinates of x with respect to triangle t.
  Eigen::Vector3d barycentric(int t, const Point& x) const;
  /// Gradients of the three barycentric coordinate functions on `t`.
  std::array<Point, 3> barycentric_gradients(int t) const;

  Point edge_normal(int e) const;
  double edge_length(int e) const;
  Point edge_midpoint(int e) const;

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }
  bool is_used_vertex(int v) const { return used_vertex_[v]; }
  /// Dense interior index of vertex `v`, or -1 for boundary/unused vertices.
  int interior_index(int v) const { return interior_index_[v]; }
  int interior_vertex(int i) const { return interior_[i]; }

  int level() const { return level_; }
  double h() const { return h_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Same vertex coordinates and triangle lists (bitwise).
  bool same_topology(const Mesh& other) const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::array<int, 3>> edge_signs_;
  std::vector<double> areas_;
  std::vector<bool> boundary_vertex_;
  std::vector<bool> used_vertex_;
  std::vector<int> interior_index_;
  std::vector<int> interior_;
  std::vector<std::string> warnings_;
  int level_;
  double h_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

struct VertexEmbedding {
  int triangle;
  Eigen::Vector3d bary;
};

/// Transfer data between a mesh and its red refinement.
struct Prolongation {
  MeshPtr coarse;
  MeshPtr fine;
  std::vector<int> parent;                  // fine triangle -> coarse triangle
  std::vector<VertexEmbedding> embedding;   // fine vertex -> coarse simplex
};

struct Refinement {
  MeshPtr mesh;
  Prolongation prolongation;
};

/// Uniform triangulation with n = 2^(k-1) squares per side, each split along
/// the lower-left to upper-right diagonal. h = sqrt(2) * 2^(1-k).
MeshPtr build_uniform(int level);

/// Red refinement: every triangle splits into four congruent children.
Refinement refine(const MeshPtr& mesh);

/// Uniform mesh at `level` obtained by refining build_uniform(base_level).
/// Meshes built from the same base share their numbering, which the
/// cross-level comparisons rely on.
MeshPtr build_nested(int base_level, int level);

/// Reads the `V E T` / vertices / triangles text format.
MeshPtr load_mesh(const std::filesystem::path& path);
MeshPtr parse_mesh(const std::string& text);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace plateopt
