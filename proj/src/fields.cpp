#include "plateopt/fields.hpp"

#include <stdexcept>
#include <string>

namespace plateopt {

void require_same_mesh(const MeshPtr& a, const MeshPtr& b, const char* what) {
  if (!a || !b || (a != b && !a->same_topology(*b))) {
    throw std::invalid_argument(std::string(what) + ": fields live on different meshes");
  }
}

P0Field::P0Field(MeshPtr m, Eigen::VectorXd v) : mesh(std::move(m)), values(std::move(v)) {
  if (values.size() != mesh->num_triangles()) throw std::invalid_argument("P0Field: size mismatch");
}

P0Field P0Field::zero(MeshPtr m) {
  const int n = m->num_triangles();
  return P0Field(std::move(m), Eigen::VectorXd::Zero(n));
}

P1Field::P1Field(MeshPtr m, Eigen::VectorXd v) : mesh(std::move(m)), values(std::move(v)) {
  if (values.size() != mesh->num_vertices()) throw std::invalid_argument("P1Field: size mismatch");
}

P1Field P1Field::zero(MeshPtr m) {
  const int n = m->num_vertices();
  return P1Field(std::move(m), Eigen::VectorXd::Zero(n));
}

P1Field P1Field::interpolate(MeshPtr m, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(m->num_vertices());
  for (int i = 0; i < m->num_vertices(); ++i) v[i] = f(m->vertex(i));
  return P1Field(std::move(m), std::move(v));
}

double P1Field::eval(int t, const Eigen::Vector3d& bary) const {
  const auto& tri = mesh->triangle(t);
  return bary[0] * values[tri[0]] + bary[1] * values[tri[1]] + bary[2] * values[tri[2]];
}

Point P1Field::gradient(int t) const {
  const auto grads = mesh->barycentric_gradients(t);
  const auto& tri = mesh->triangle(t);
  return values[tri[0]] * grads[0] + values[tri[1]] * grads[1] + values[tri[2]] * grads[2];
}

Eigen::VectorXd P1Field::interior_values() const {
  Eigen::VectorXd out(mesh->num_interior_vertices());
  for (int i = 0; i < out.size(); ++i) out[i] = values[mesh->interior_vertex(i)];
  return out;
}

P1Field P1Field::from_interior(MeshPtr m, const Eigen::VectorXd& interior) {
  if (interior.size() != m->num_interior_vertices()) {
    throw std::invalid_argument("P1Field::from_interior: size mismatch");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m->num_vertices());
  for (int i = 0; i < interior.size(); ++i) v[m->interior_vertex(i)] = interior[i];
  return P1Field(std::move(m), std::move(v));
}

RT0Field::RT0Field(MeshPtr m, Eigen::VectorXd f) : mesh(std::move(m)), flux(std::move(f)) {
  if (flux.size() != mesh->num_edges()) throw std::invalid_argument("RT0Field: size mismatch");
}

RT0Field RT0Field::zero(MeshPtr m) {
  const int n = m->num_edges();
  return RT0Field(std::move(m), Eigen::VectorXd::Zero(n));
}

Point rt0_basis(const Mesh& mesh, int t, int i, const Point& x) {
  const Point& opposite = mesh.vertex(mesh.triangle(t)[i]);
  return (mesh.edge_sign(t, i) / (2.0 * mesh.area(t))) * (x - opposite);
}

Point RT0Field::eval(int t, const Point& x) const {
  Point v = Point::Zero();
  for (int i = 0; i < 3; ++i) v += flux[mesh->triangle_edge(t, i)] * rt0_basis(*mesh, t, i, x);
  return v;
}

double RT0Field::divergence(int t) const {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += mesh->edge_sign(t, i) * flux[mesh->triangle_edge(t, i)];
  return sum / mesh->area(t);
}

}  // namespace plateopt
