#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Sparse>

#include "plateopt/fields.hpp"
#include "plateopt/poisson_p1.hpp"
#include "plateopt/problem.hpp"

namespace plateopt {

/// Concatenated discrete primal/adjoint vector with its regularization
/// parameter.
///
/// RT0 layout: x = (v_h, y_h, v_qh, q_h) with blocks of size E, T, E, T.
/// P1 layout:  x = (y_h, q_h) over interior vertices.
/// `datum` caches z_h (per triangle for RT0, per vertex for P1).
struct OptState {
  Discretization discretization = Discretization::rt0;
  MeshPtr mesh;
  double gamma = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd datum;
};

/// Length of x for a discretization on a mesh.
Eigen::Index state_size(Discretization d, const Mesh& mesh);

namespace rt0 {
RT0Field flux(const OptState& s);
P0Field state(const OptState& s);
RT0Field adjoint_flux(const OptState& s);
P0Field adjoint(const OptState& s);
P0Field datum(const OptState& s);
}  // namespace rt0

namespace p1 {
P1Field state(const OptState& s);
P1Field adjoint(const OptState& s);
P1Field datum(const OptState& s);
}  // namespace p1

/// Control classification (i / lower clamp / upper clamp) and state-active
/// flags (y + tau < 0). RT0: one entry per triangle. P1: one entry per split
/// quadrature point, triangle-major with `points_per_triangle` per triangle.
struct ActiveSets {
  std::vector<ControlRegion> control;
  std::vector<unsigned char> state_active;
  int points_per_triangle = 1;

  std::size_t count(ControlRegion r) const;
  std::size_t count_state_active() const;
};

/// Regularized discrete optimality system F^gamma(x) = 0 of one
/// discretization on one mesh, with its generalized Jacobian.
class KktSystem {
 public:
  virtual ~KktSystem() = default;

  const ProblemSpec& spec() const { return spec_; }
  const MeshPtr& mesh() const { return mesh_; }
  Discretization discretization() const { return spec_.discretization; }
  Eigen::Index size() const { return state_size(discretization(), *mesh_); }
  /// z_h, the scalar component of G_h(f).
  const Eigen::VectorXd& datum() const { return datum_; }

  OptState zero_state(double gamma) const;
  /// Checks mesh/layout compatibility and installs this system's datum.
  OptState adopt(OptState s) const;

  virtual Eigen::VectorXd residual(const OptState& s) const = 0;
  /// Block operator [[A, Dk1], [Dk2, A]]; the subgradient at kinks is 0.
  virtual SparseMatrix jacobian(const OptState& s) const = 0;
  /// J^gamma = ∫ l^(-1/3) + gamma/2 ||(y+tau)^-||^2 (+ alpha/2 ||y - y_target||^2).
  virtual double objective(const OptState& s) const = 0;
  virtual ActiveSets active_sets(const OptState& s) const = 0;

 protected:
  KktSystem(ProblemSpec spec, MeshPtr mesh);
  void check(const OptState& s) const;

  ProblemSpec spec_;
  MeshPtr mesh_;
  Eigen::VectorXd datum_;
};

/// `split_depth` is the subdivision depth of the split quadrature (P1) and of
/// the load integrals of the tracking terms (both discretizations).
std::unique_ptr<KktSystem> make_kkt_system(const ProblemSpec& spec, MeshPtr mesh, int split_depth = 2);

/// Elementwise control l = (P(3 q z))^(-3/4) for piecewise constant q, z.
P0Field recover_control(const P0Field& q, const P0Field& z, const ProblemSpec& spec);

/// Control of the P1 variational discretization: the composition
/// x -> (P(3 q_h(x) z_h(x)))^(-3/4), evaluated on demand.
class ControlFunction {
 public:
  ControlFunction(P1Field q, P1Field z, const ProblemSpec& spec);

  double eval(int t, const Eigen::Vector3d& bary) const { return law_.control(argument(t, bary)); }
  ControlRegion region(int t, const Eigen::Vector3d& bary) const { return law_.classify(argument(t, bary)); }
  double argument(int t, const Eigen::Vector3d& bary) const {
    return 3.0 * q_.eval(t, bary) * z_.eval(t, bary);
  }
  const MeshPtr& mesh() const { return q_.mesh; }
  const P1Field& adjoint() const { return q_; }
  const P1Field& datum() const { return z_; }
  const ControlLaw& law() const { return law_; }

  /// Values at the centroids of the `refinements`-fold red refinement.
  P0Field sample_p0(int refinements) const;

 private:
  P1Field q_;
  P1Field z_;
  ControlLaw law_;
};

ControlFunction recover_control(const P1Field& q, const P1Field& z, const ProblemSpec& spec);

/// u = l^(-1/3) elementwise; rejects values outside [M^-3, m^-3].
P0Field recover_thickness(const P0Field& l, const ProblemSpec& spec);

/// nu^gamma = gamma (y + tau)^-.
P0Field moreau_yosida_multiplier(const P0Field& y, double gamma, double tau);
/// Nodal values of gamma (y + tau)^- (the multiplier itself is not P1).
P1Field moreau_yosida_multiplier(const P1Field& y, double gamma, double tau);

}  // namespace plateopt
