#pragma once

#include <Eigen/SparseLU>

#include "plateopt/fields.hpp"
#include "plateopt/poisson_p1.hpp"

namespace plateopt {

/// Saddle-point matrix [[M, B^T], [B, 0]] of the mixed Poisson problem.
/// Unknowns are ordered (edge fluxes, element values); M is the RT0 mass
/// matrix and B(T, e) = ∫_T div psi_e = ±1.
struct MixedSystem {
  SparseMatrix matrix;
  int num_edges = 0;
  int num_triangles = 0;
  int size() const { return num_edges + num_triangles; }
};

MixedSystem assemble_mixed(const Mesh& mesh);

/// Local RT0 mass matrix of triangle t (edges in local order).
Eigen::Matrix3d rt0_local_mass(const Mesh& mesh, int t);

/// Element integrals ∫_T g by gauss3.
Eigen::VectorXd element_integrals(const Mesh& mesh, const ScalarFunction& g);

struct MixedSolution {
  P0Field y;
  RT0Field v;
};

/// Factorized mixed solution operator G_h(g) = (y_h, v_h) on one mesh.
class Rt0Poisson {
 public:
  explicit Rt0Poisson(MeshPtr mesh);

  const MeshPtr& mesh() const { return mesh_; }
  const MixedSystem& system() const { return system_; }

  MixedSolution solve(const ScalarFunction& g) const;
  MixedSolution solve(const P0Field& g) const;
  /// Solves with the right-hand side given as element integrals ∫_T g.
  MixedSolution solve_element_integrals(const Eigen::VectorXd& integrals) const;

 private:
  MeshPtr mesh_;
  MixedSystem system_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

MixedSolution solve_poisson_rt0(const MeshPtr& mesh, const ScalarFunction& g);
MixedSolution solve_poisson_rt0(const MeshPtr& mesh, const P0Field& g);

struct Rt0Errors {
  double l2_scalar = 0.0;
  double l2_flux = 0.0;
  double linf_scalar = 0.0;
};

/// Errors against the exact scalar and its gradient (the exact flux).
/// The maximum is sampled per element at corners, Gauss points and centroid.
Rt0Errors rt0_norms(const P0Field& y, const RT0Field& v, const ScalarFunction& y_exact,
                    const VectorFunction& grad_exact);

}  // namespace plateopt
