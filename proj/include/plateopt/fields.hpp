#pragma once

#include <functional>

#include <Eigen/Core>

#include "plateopt/mesh.hpp"

namespace plateopt {

/// Piecewise constant scalar: one value per triangle.
struct P0Field {
  MeshPtr mesh;
  Eigen::VectorXd values;

  P0Field() = default;
  P0Field(MeshPtr m, Eigen::VectorXd v);
  static P0Field zero(MeshPtr m);

  double operator()(int t) const { return values[t]; }
};

/// Continuous piecewise linear scalar: one value per vertex.
struct P1Field {
  MeshPtr mesh;
  Eigen::VectorXd values;

  P1Field() = default;
  P1Field(MeshPtr m, Eigen::VectorXd v);
  static P1Field zero(MeshPtr m);
  static P1Field interpolate(MeshPtr m, const std::function<double(const Point&)>& f);

  double eval(int t, const Eigen::Vector3d& bary) const;
  Point gradient(int t) const;
  /// Values at interior vertices in Mesh::interior_index order.
  Eigen::VectorXd interior_values() const;
  /// Extends interior values by zero on the boundary.
  static P1Field from_interior(MeshPtr m, const Eigen::VectorXd& interior);
};

/// Lowest-order Raviart-Thomas field. Coefficient e is the total flux across
/// edge e in the direction of Mesh::edge_normal(e).
struct RT0Field {
  MeshPtr mesh;
  Eigen::VectorXd flux;

  RT0Field() = default;
  RT0Field(MeshPtr m, Eigen::VectorXd f);
  static RT0Field zero(MeshPtr m);

  /// Local field a + beta x on triangle t evaluated at x.
  Point eval(int t, const Point& x) const;
  /// Elementwise constant divergence.
  double divergence(int t) const;
};

/// Local RT0 basis function of the edge opposite local vertex i of t.
Point rt0_basis(const Mesh& mesh, int t, int i, const Point& x);

void require_same_mesh(const MeshPtr& a, const MeshPtr& b, const char* what);

}  // namespace plateopt
