#include "plateopt/poisson_p1.hpp"

#include <cmath>
#include <stdexcept>

namespace plateopt {

namespace {

template <typename LocalMatrix>
SparseMatrix assemble_interior(const Mesh& mesh, LocalMatrix&& local) {
  const int n = mesh.num_interior_vertices();
  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(9 * mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Matrix3d m = local(t);
    const auto& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) {
      const int row = mesh.interior_index(tri[i]);
      if (row < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int col = mesh.interior_index(tri[j]);
        if (col >= 0) triplets.emplace_back(row, col, m(i, j));
      }
    }
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh) {
  return assemble_interior(mesh, [&](int t) {
    const auto g = mesh.barycentric_gradients(t);
    Eigen::Matrix3d k;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) k(i, j) = mesh.area(t) * g[i].dot(g[j]);
    return k;
  });
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  return assemble_interior(mesh, [&](int t) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Constant(1.0);
    m.diagonal().setConstant(2.0);
    return Eigen::Matrix3d(m * (mesh.area(t) / 12.0));
  });
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const ScalarFunction& g) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.num_interior_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    for (const auto& qp : gauss3()) {
      const double w = qp.weight * mesh.area(t) * g(mesh.map(t, qp.bary));
      for (int i = 0; i < 3; ++i) {
        const int row = mesh.interior_index(tri[i]);
        if (row >= 0) load[row] += w * qp.bary[i];
      }
    }
  }
  return load;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const P0Field& g) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.num_interior_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) {
      const int row = mesh.interior_index(tri[i]);
      if (row >= 0) load[row] += g(t) * mesh.area(t) / 3.0;
    }
  }
  return load;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const P1Field& g) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.num_interior_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    for (const auto& qp : gauss3()) {
      const double w = qp.weight * mesh.area(t) * g.eval(t, qp.bary);
      for (int i = 0; i < 3; ++i) {
        const int row = mesh.interior_index(tri[i]);
        if (row >= 0) load[row] += w * qp.bary[i];
      }
    }
  }
  return load;
}

P1Poisson::P1Poisson(MeshPtr mesh) : mesh_(std::move(mesh)), stiffness_(assemble_stiffness(*mesh_)) {
  if (stiffness_.rows() > 0) {
    cholesky_.compute(stiffness_);
    if (cholesky_.info() != Eigen::Success) {
      throw std::runtime_error("P1Poisson: Cholesky factorization of the stiffness matrix failed");
    }
  }
}

P1Field P1Poisson::solve(const ScalarFunction& g) const { return solve_load(assemble_load(*mesh_, g)); }

P1Field P1Poisson::solve_load(const Eigen::VectorXd& load) const {
  if (load.size() != stiffness_.rows()) throw std::invalid_argument("P1Poisson: load size mismatch");
  if (load.size() == 0) return P1Field::zero(mesh_);
  Eigen::VectorXd y = cholesky_.solve(load);
  return P1Field::from_interior(mesh_, y);
}

P1Field solve_poisson_p1(const MeshPtr& mesh, const ScalarFunction& g) {
  return P1Poisson(mesh).solve(g);
}

P1Field solve_poisson_p1(const MeshPtr& mesh, const P0Field& g) {
  require_same_mesh(mesh, g.mesh, "solve_poisson_p1");
  return P1Poisson(mesh).solve_load(assemble_load(*mesh, g));
}

P1Field solve_poisson_p1(const MeshPtr& mesh, const P1Field& g) {
  require_same_mesh(mesh, g.mesh, "solve_poisson_p1");
  return P1Poisson(mesh).solve_load(assemble_load(*mesh, g));
}

double P1Errors::h1() const { return std::sqrt(l2 * l2 + h1_semi * h1_semi); }

P1Errors p1_norms(const P1Field& a, const ScalarFunction& exact, const VectorFunction& exact_gradient) {
  const Mesh& mesh = *a.mesh;
  P1Errors err;
  double l2 = 0.0;
  double h1 = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Point grad = a.gradient(t);
    for (const auto& qp : gauss3()) {
      const Point x = mesh.map(t, qp.bary);
      const double w = qp.weight * mesh.area(t);
      const double d = exact(x) - a.eval(t, qp.bary);
      l2 += w * d * d;
      h1 += w * (exact_gradient(x) - grad).squaredNorm();
    }
    for (const auto& bary : linf_samples()) {
      err.linf = std::max(err.linf, std::abs(exact(mesh.map(t, bary)) - a.eval(t, bary)));
    }
  }
  err.l2 = std::sqrt(l2);
  err.h1_semi = std::sqrt(h1);
  return err;
}

}  // namespace plateopt
