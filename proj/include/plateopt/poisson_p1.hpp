#pragma once

#include <memory>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "plateopt/fields.hpp"
#include "plateopt/quadrature.hpp"

namespace plateopt {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Stiffness matrix <grad phi_j, grad phi_k> over interior vertices.
SparseMatrix assemble_stiffness(const Mesh& mesh);
/// Mass matrix <phi_j, phi_k> over interior vertices (exact for P1).
SparseMatrix assemble_mass(const Mesh& mesh);

/// Load vector <g, phi_j> over interior vertices by gauss3.
Eigen::VectorXd assemble_load(const Mesh& mesh, const ScalarFunction& g);
Eigen::VectorXd assemble_load(const Mesh& mesh, const P0Field& g);
Eigen::VectorXd assemble_load(const Mesh& mesh, const P1Field& g);

/// Factorized P1 Dirichlet-Laplace solution operator G_h on one mesh.
class P1Poisson {
 public:
  explicit P1Poisson(MeshPtr mesh);

  const MeshPtr& mesh() const { return mesh_; }
  const SparseMatrix& stiffness() const { return stiffness_; }

  P1Field solve(const ScalarFunction& g) const;
  /// Solves K y = load for a precomputed load vector over interior vertices.
  P1Field solve_load(const Eigen::VectorXd& load) const;

 private:
  MeshPtr mesh_;
  SparseMatrix stiffness_;
  Eigen::SimplicialLLT<SparseMatrix> cholesky_;
};

P1Field solve_poisson_p1(const MeshPtr& mesh, const ScalarFunction& g);
P1Field solve_poisson_p1(const MeshPtr& mesh, const P0Field& g);
P1Field solve_poisson_p1(const MeshPtr& mesh, const P1Field& g);

struct P1Errors {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double linf = 0.0;
  double h1() const;
};

/// Errors of `a` against an exact solution. L2 and H1 seminorm by gauss3,
/// the maximum over corners, Gauss points and centroids.
P1Errors p1_norms(const P1Field& a, const ScalarFunction& exact, const VectorFunction& exact_gradient);

}  // namespace plateopt
