#include "plateopt/poisson_rt0.hpp"

#include <cmath>
#include <stdexcept>

namespace plateopt {

Eigen::Matrix3d rt0_local_mass(const Mesh& mesh, int t) {
  // psi_i . psi_j is quadratic, so gauss3 is exact
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const auto& qp : gauss3()) {
    const Point x = mesh.map(t, qp.bary);
    std::array<Point, 3> psi;
    for (int i = 0; i < 3; ++i) psi[i] = rt0_basis(mesh, t, i, x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) += qp.weight * psi[i].dot(psi[j]);
  }
  return m * mesh.area(t);
}

MixedSystem assemble_mixed(const Mesh& mesh) {
  MixedSystem sys;
  sys.num_edges = mesh.num_edges();
  sys.num_triangles = mesh.num_triangles();
  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(15 * mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Matrix3d m = rt0_local_mass(mesh, t);
    for (int i = 0; i < 3; ++i) {
      const int ei = mesh.triangle_edge(t, i);
      for (int j = 0; j < 3; ++j) triplets.emplace_back(ei, mesh.triangle_edge(t, j), m(i, j));
      const double b = mesh.edge_sign(t, i);
      triplets.emplace_back(sys.num_edges + t, ei, b);
      triplets.emplace_back(ei, sys.num_edges + t, b);
    }
  }
  sys.matrix.resize(sys.size(), sys.size());
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

Eigen::VectorXd element_integrals(const Mesh& mesh, const ScalarFunction& g) {
  Eigen::VectorXd out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) out[t] = integrate(mesh, t, g);
  return out;
}

Rt0Poisson::Rt0Poisson(MeshPtr mesh) : mesh_(std::move(mesh)), system_(assemble_mixed(*mesh_)) {
  lu_.analyzePattern(system_.matrix);
  lu_.factorize(system_.matrix);
  if (lu_.info() != Eigen::Success) {
    throw std::runtime_error("Rt0Poisson: factorization of the mixed system failed: " + lu_.lastErrorMessage());
  }
}

MixedSolution Rt0Poisson::solve(const ScalarFunction& g) const {
  return solve_element_integrals(element_integrals(*mesh_, g));
}

MixedSolution Rt0Poisson::solve(const P0Field& g) const {
  require_same_mesh(mesh_, g.mesh, "Rt0Poisson::solve");
  Eigen::VectorXd integrals(mesh_->num_triangles());
  for (int t = 0; t < mesh_->num_triangles(); ++t) integrals[t] = g(t) * mesh_->area(t);
  return solve_element_integrals(integrals);
}

MixedSolution Rt0Poisson::solve_element_integrals(const Eigen::VectorXd& integrals) const {
  if (integrals.size() != system_.num_triangles) {
    throw std::invalid_argument("Rt0Poisson: right-hand side size mismatch");
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(system_.size());
  rhs.tail(system_.num_triangles) = -integrals;
  Eigen::VectorXd sol = lu_.solve(rhs);
  return {P0Field(mesh_, sol.tail(system_.num_triangles)), RT0Field(mesh_, sol.head(system_.num_edges))};
}

MixedSolution solve_poisson_rt0(const MeshPtr& mesh, const ScalarFunction& g) {
  return Rt0Poisson(mesh).solve(g);
}

MixedSolution solve_poisson_rt0(const MeshPtr& mesh, const P0Field& g) {
  return Rt0Poisson(mesh).solve(g);
}

Rt0Errors rt0_norms(const P0Field& y, const RT0Field& v, const ScalarFunction& y_exact,
                    const VectorFunction& grad_exact) {
  require_same_mesh(y.mesh, v.mesh, "rt0_norms");
  const Mesh& mesh = *y.mesh;
  Rt0Errors err;
  double l2y = 0.0;
  double l2v = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (const auto& qp : gauss3()) {
      const Point x = mesh.map(t, qp.bary);
      const double w = qp.weight * mesh.area(t);
      const double dy = y_exact(x) - y(t);
      l2y += w * dy * dy;
      l2v += w * (grad_exact(x) - v.eval(t, x)).squaredNorm();
    }
    for (const auto& bary : linf_samples()) {
      err.linf_scalar = std::max(err.linf_scalar, std::abs(y_exact(mesh.map(t, bary)) - y(t)));
    }
  }
  err.l2_scalar = std::sqrt(l2y);
  err.l2_flux = std::sqrt(l2v);
  return err;
}

}  // namespace plateopt
