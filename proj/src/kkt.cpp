#include "plateopt/kkt.hpp"

#include <algorithm>
#include <stdexcept>

#include "kkt_internal.hpp"

namespace plateopt {

Eigen::Index state_size(Discretization d, const Mesh& mesh) {
  if (d == Discretization::rt0) return 2 * (mesh.num_edges() + mesh.num_triangles());
  return 2 * mesh.num_interior_vertices();
}

namespace {

void require(const OptState& s, Discretization d, const char* what) {
  if (s.discretization != d) {
    throw std::invalid_argument(std::string(what) + ": state has discretization " +
                                std::string(to_string(s.discretization)));
  }
  if (!s.mesh || s.x.size() != state_size(d, *s.mesh)) {
    throw std::invalid_argument(std::string(what) + ": state vector does not match its mesh");
  }
}

}  // namespace

namespace rt0 {

RT0Field flux(const OptState& s) {
  require(s, Discretization::rt0, "rt0::flux");
  return RT0Field(s.mesh, s.x.head(s.mesh->num_edges()));
}

P0Field state(const OptState& s) {
  require(s, Discretization::rt0, "rt0::state");
  return P0Field(s.mesh, s.x.segment(s.mesh->num_edges(), s.mesh->num_triangles()));
}

RT0Field adjoint_flux(const OptState& s) {
  require(s, Discretization::rt0, "rt0::adjoint_flux");
  const int n = s.mesh->num_edges() + s.mesh->num_triangles();
  return RT0Field(s.mesh, s.x.segment(n, s.mesh->num_edges()));
}

P0Field adjoint(const OptState& s) {
  require(s, Discretization::rt0, "rt0::adjoint");
  return P0Field(s.mesh, s.x.tail(s.mesh->num_triangles()));
}

P0Field datum(const OptState& s) {
  require(s, Discretization::rt0, "rt0::datum");
  return P0Field(s.mesh, s.datum);
}

}  // namespace rt0

namespace p1 {

P1Field state(const OptState& s) {
  require(s, Discretization::p1, "p1::state");
  return P1Field::from_interior(s.mesh, s.x.head(s.mesh->num_interior_vertices()));
}

P1Field adjoint(const OptState& s) {
  require(s, Discretization::p1, "p1::adjoint");
  return P1Field::from_interior(s.mesh, s.x.tail(s.mesh->num_interior_vertices()));
}

P1Field datum(const OptState& s) {
  require(s, Discretization::p1, "p1::datum");
  return P1Field(s.mesh, s.datum);
}

}  // namespace p1

std::size_t ActiveSets::count(ControlRegion r) const {
  return static_cast<std::size_t>(std::count(control.begin(), control.end(), r));
}

std::size_t ActiveSets::count_state_active() const {
  return static_cast<std::size_t>(std::count(state_active.begin(), state_active.end(), 1));
}

KktSystem::KktSystem(ProblemSpec spec, MeshPtr mesh) : spec_(std::move(spec)), mesh_(std::move(mesh)) {
  spec_.validate();
  if (!mesh_) throw std::invalid_argument("KktSystem: null mesh");
}

OptState KktSystem::zero_state(double gamma) const {
  if (!(gamma > 0.0)) throw std::invalid_argument("KktSystem: gamma must be > 0");
  return OptState{discretization(), mesh_, gamma, Eigen::VectorXd::Zero(size()), datum_};
}

OptState KktSystem::adopt(OptState s) const {
  if (s.discretization != discretization()) throw std::invalid_argument("KktSystem::adopt: discretization mismatch");
  require_same_mesh(s.mesh, mesh_, "KktSystem::adopt");
  if (s.x.size() != size()) throw std::invalid_argument("KktSystem::adopt: state size mismatch");
  if (!(s.gamma > 0.0)) throw std::invalid_argument("KktSystem::adopt: gamma must be > 0");
  s.mesh = mesh_;
  s.datum = datum_;
  return s;
}

void KktSystem::check(const OptState& s) const {
  require(s, discretization(), "KktSystem");
  if (s.mesh != mesh_ && !s.mesh->same_topology(*mesh_)) {
    throw std::invalid_argument("KktSystem: state lives on a different mesh");
  }
  if (s.datum.size() != datum_.size()) throw std::invalid_argument("KktSystem: datum size mismatch");
  if (!(s.gamma > 0.0)) throw std::invalid_argument("KktSystem: gamma must be > 0");
}

std::unique_ptr<KktSystem> make_kkt_system(const ProblemSpec& spec, MeshPtr mesh, int split_depth) {
  if (spec.discretization == Discretization::rt0) return detail::make_rt0_system(spec, std::move(mesh), split_depth);
  return detail::make_p1_system(spec, std::move(mesh), split_depth);
}

P0Field recover_control(const P0Field& q, const P0Field& z, const ProblemSpec& spec) {
  require_same_mesh(q.mesh, z.mesh, "recover_control");
  const ControlLaw law(spec);
  Eigen::VectorXd l(q.values.size());
  for (Eigen::Index t = 0; t < l.size(); ++t) l[t] = law.control(3.0 * q.values[t] * z.values[t]);
  return P0Field(q.mesh, std::move(l));
}

ControlFunction::ControlFunction(P1Field q, P1Field z, const ProblemSpec& spec)
    : q_(std::move(q)), z_(std::move(z)), law_(spec) {
  require_same_mesh(q_.mesh, z_.mesh, "ControlFunction");
}

P0Field ControlFunction::sample_p0(int refinements) const {
  MeshPtr fine = mesh();
  std::vector<int> ancestor(static_cast<std::size_t>(fine->num_triangles()));
  for (int t = 0; t < fine->num_triangles(); ++t) ancestor[t] = t;
  for (int r = 0; r < refinements; ++r) {
    Refinement ref = refine(fine);
    std::vector<int> next(ref.prolongation.parent.size());
    for (std::size_t t = 0; t < next.size(); ++t) next[t] = ancestor[ref.prolongation.parent[t]];
    ancestor = std::move(next);
    fine = ref.mesh;
  }
  Eigen::VectorXd values(fine->num_triangles());
  for (int t = 0; t < fine->num_triangles(); ++t) {
    const int coarse = ancestor[t];
    values[t] = eval(coarse, mesh()->barycentric(coarse, fine->centroid(t)));
  }
  return P0Field(fine, std::move(values));
}

ControlFunction recover_control(const P1Field& q, const P1Field& z, const ProblemSpec& spec) {
  return ControlFunction(q, z, spec);
}

P0Field recover_thickness(const P0Field& l, const ProblemSpec& spec) {
  Eigen::VectorXd u(l.values.size());
  for (Eigen::Index t = 0; t < u.size(); ++t) u[t] = thickness_from_control(l.values[t], spec);
  return P0Field(l.mesh, std::move(u));
}

P0Field moreau_yosida_multiplier(const P0Field& y, double gamma, double tau) {
  if (!(gamma > 0.0)) throw std::invalid_argument("moreau_yosida_multiplier: gamma must be > 0");
  return P0Field(y.mesh, y.values.unaryExpr([=](double v) { return moreau_yosida(v, gamma, tau); }));
}

P1Field moreau_yosida_multiplier(const P1Field& y, double gamma, double tau) {
  if (!(gamma > 0.0)) throw std::invalid_argument("moreau_yosida_multiplier: gamma must be > 0");
  return P1Field(y.mesh, y.values.unaryExpr([=](double v) { return moreau_yosida(v, gamma, tau); }));
}

}  // namespace plateopt
