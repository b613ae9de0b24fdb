#include <algorithm>
#include <cmath>

#include "kkt_internal.hpp"
#include "plateopt/poisson_rt0.hpp"

namespace plateopt::detail {
namespace {

class Rt0Kkt final : public KktSystem {
 public:
  Rt0Kkt(const ProblemSpec& spec, MeshPtr mesh, int split_depth)
      : KktSystem(spec, std::move(mesh)), law_(spec_) {
    const Rt0Poisson poisson(mesh_);
    system_ = poisson.system().matrix;
    datum_ = poisson.solve(spec_.load).y.values;
    const int T = mesh_->num_triangles();
    if (spec_.tracking) {
      const auto rule = subdivided_gauss3(split_depth);
      extra_load_.resize(T);
      target_.resize(T);
      target_sq_.resize(T);
      for (int t = 0; t < T; ++t) {
        double e = 0.0, g = 0.0, g2 = 0.0;
        for (const auto& qp : rule) {
          const Point x = mesh_->map(t, qp.bary);
          e += qp.weight * spec_.tracking->residual_load(x);
          const double yo = spec_.tracking->target(x);
          g += qp.weight * yo;
          g2 += qp.weight * yo * yo;
        }
        extra_load_[t] = e * mesh_->area(t);
        target_[t] = g * mesh_->area(t);
        target_sq_[t] = g2 * mesh_->area(t);
      }
    }
  }

  Eigen::VectorXd residual(const OptState& s) const override {
    check(s);
    const int E = mesh_->num_edges();
    const int T = mesh_->num_triangles();
    const int n = E + T;
    Eigen::VectorXd r(2 * n);
    r.head(n) = system_ * s.x.head(n);
    r.tail(n) = system_ * s.x.tail(n);
    const double alpha = spec_.tracking ? spec_.tracking->alpha : 0.0;
    for (int t = 0; t < T; ++t) {
      const double area = mesh_->area(t);
      const double z = datum_[t];
      const double y = s.x[E + t];
      const double q = s.x[n + E + t];
      r[E + t] += z * law_.control(3.0 * q * z) * area;
      r[n + E + t] += moreau_yosida(y, s.gamma, spec_.state_offset) * area;
      if (spec_.tracking) {
        r[E + t] += extra_load_[t];
        r[n + E + t] += alpha * (y * area - target_[t]);
      }
    }
    return r;
  }

  SparseMatrix jacobian(const OptState& s) const override {
    check(s);
    const int E = mesh_->num_edges();
    const int T = mesh_->num_triangles();
    const int n = E + T;
    Triplets trip;
    trip.reserve(2 * system_.nonZeros() + 2 * T);
    for (int k = 0; k < system_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(system_, k); it; ++it) {
        trip.emplace_back(it.row(), it.col(), it.value());
        trip.emplace_back(n + it.row(), n + it.col(), it.value());
      }
    }
    const double alpha = spec_.tracking ? spec_.tracking->alpha : 0.0;
    for (int t = 0; t < T; ++t) {
      const double area = mesh_->area(t);
      const double z = datum_[t];
      const double y = s.x[E + t];
      const double q = s.x[n + E + t];
      // d/dq of z l(3qz) |T|
      const double dk1 = 3.0 * z * z * law_.derivative(3.0 * q * z) * area;
      trip.emplace_back(E + t, n + E + t, dk1);
      double dk2 = y + spec_.state_offset < 0.0 ? s.gamma * area : 0.0;
      dk2 += alpha * area;
      trip.emplace_back(n + E + t, E + t, dk2);
    }
    SparseMatrix J(2 * n, 2 * n);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }

  double objective(const OptState& s) const override {
    check(s);
    const int E = mesh_->num_edges();
    const int T = mesh_->num_triangles();
    const int n = E + T;
    double volume = 0.0, penalty = 0.0, tracking = 0.0;
    for (int t = 0; t < T; ++t) {
      const double area = mesh_->area(t);
      const double y = s.x[E + t];
      const double q = s.x[n + E + t];
      volume += std::cbrt(1.0 / law_.control(3.0 * q * datum_[t])) * area;
      const double v = std::min(0.0, y + spec_.state_offset);
      penalty += v * v * area;
      if (spec_.tracking) tracking += y * y * area - 2.0 * y * target_[t] + target_sq_[t];
    }
    double J = volume + 0.5 * s.gamma * penalty;
    if (spec_.tracking) J += 0.5 * spec_.tracking->alpha * tracking;
    return J;
  }

  ActiveSets active_sets(const OptState& s) const override {
    check(s);
    const int E = mesh_->num_edges();
    const int T = mesh_->num_triangles();
    const int n = E + T;
    ActiveSets a;
    a.control.resize(T);
    a.state_active.resize(T);
    for (int t = 0; t < T; ++t) {
      a.control[t] = law_.classify(3.0 * s.x[n + E + t] * datum_[t]);
      a.state_active[t] = s.x[E + t] + spec_.state_offset <= 0.0;
    }
    return a;
  }

 private:
  ControlLaw law_;
  SparseMatrix system_;
  Eigen::VectorXd extra_load_;  // ∫_T e
  Eigen::VectorXd target_;      // ∫_T y_target
  Eigen::VectorXd target_sq_;   // ∫_T y_target^2
};

}  // namespace

std::unique_ptr<KktSystem> make_rt0_system(const ProblemSpec& spec, MeshPtr mesh, int split_depth) {
  return std::make_unique<Rt0Kkt>(spec, std::move(mesh), split_depth);
}

}  // namespace plateopt::detail
