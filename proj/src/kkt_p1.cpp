#include <algorithm>
#include <array>
#include <cmath>

#include "kkt_internal.hpp"

namespace plateopt::detail {
namespace {

class P1Kkt final : public KktSystem {
 public:
  P1Kkt(const ProblemSpec& spec, MeshPtr mesh, int split_depth)
      : KktSystem(spec, std::move(mesh)), law_(spec_), rule_(subdivided_gauss3(split_depth)) {
    const P1Poisson poisson(mesh_);
    stiffness_ = poisson.stiffness();
    datum_ = poisson.solve(spec_.load).values;
    const int T = mesh_->num_triangles();
    dofs_.resize(T);
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < 3; ++i) dofs_[t][i] = mesh_->interior_index(mesh_->triangle(t)[i]);
    }
    if (spec_.tracking) {
      mass_ = assemble_mass(*mesh_);
      const int N = mesh_->num_interior_vertices();
      extra_load_ = Eigen::VectorXd::Zero(N);
      target_load_ = Eigen::VectorXd::Zero(N);
      for (int t = 0; t < T; ++t) {
        const double area = mesh_->area(t);
        for (const auto& qp : rule_) {
          const Point x = mesh_->map(t, qp.bary);
          const double w = qp.weight * area;
          const double e = spec_.tracking->residual_load(x);
          const double g = spec_.tracking->target(x);
          for (int i = 0; i < 3; ++i) {
            if (dofs_[t][i] < 0) continue;
            extra_load_[dofs_[t][i]] += w * e * qp.bary[i];
            target_load_[dofs_[t][i]] += w * g * qp.bary[i];
          }
        }
      }
    }
  }

  Eigen::VectorXd residual(const OptState& s) const override {
    check(s);
    const int N = mesh_->num_interior_vertices();
    const auto y = s.x.head(N);
    const auto q = s.x.tail(N);
    Eigen::VectorXd r(2 * N);
    r.head(N) = stiffness_ * y;
    r.tail(N) = stiffness_ * q;
    for (int t = 0; t < mesh_->num_triangles(); ++t) {
      const auto loc = local(s, t);
      const double area = mesh_->area(t);
      for (const auto& qp : rule_) {
        const double w = qp.weight * area;
        const double z = qp.bary.dot(loc.z);
        const double k1 = -w * z * law_.control(3.0 * qp.bary.dot(loc.q) * z);
        const double k2 = -w * moreau_yosida(qp.bary.dot(loc.y), s.gamma, spec_.state_offset);
        for (int i = 0; i < 3; ++i) {
          const int j = dofs_[t][i];
          if (j < 0) continue;
          r[j] += k1 * qp.bary[i];
          r[N + j] += k2 * qp.bary[i];
        }
      }
    }
    if (spec_.tracking) {
      r.head(N) -= extra_load_;
      r.tail(N) -= spec_.tracking->alpha * (mass_ * y - target_load_);
    }
    return r;
  }

  SparseMatrix jacobian(const OptState& s) const override {
    check(s);
    const int N = mesh_->num_interior_vertices();
    Triplets trip;
    trip.reserve(2 * stiffness_.nonZeros() + 18 * static_cast<std::size_t>(mesh_->num_triangles()));
    for (int k = 0; k < stiffness_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(stiffness_, k); it; ++it) {
        trip.emplace_back(it.row(), it.col(), it.value());
        trip.emplace_back(N + it.row(), N + it.col(), it.value());
      }
    }
    if (spec_.tracking) {
      for (int k = 0; k < mass_.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(mass_, k); it; ++it) {
          trip.emplace_back(N + it.row(), it.col(), -spec_.tracking->alpha * it.value());
        }
      }
    }
    for (int t = 0; t < mesh_->num_triangles(); ++t) {
      const auto loc = local(s, t);
      const double area = mesh_->area(t);
      Eigen::Matrix3d d1 = Eigen::Matrix3d::Zero();
      Eigen::Matrix3d d2 = Eigen::Matrix3d::Zero();
      for (const auto& qp : rule_) {
        const double w = qp.weight * area;
        const double z = qp.bary.dot(loc.z);
        // d/dq of -z l(3qz)
        const double c1 = -3.0 * z * z * law_.derivative(3.0 * qp.bary.dot(loc.q) * z);
        if (c1 != 0.0) d1 += (w * c1) * qp.bary * qp.bary.transpose();
        if (qp.bary.dot(loc.y) + spec_.state_offset < 0.0) d2 -= (w * s.gamma) * qp.bary * qp.bary.transpose();
      }
      for (int i = 0; i < 3; ++i) {
        const int j = dofs_[t][i];
        if (j < 0) continue;
        for (int l = 0; l < 3; ++l) {
          const int k = dofs_[t][l];
          if (k < 0) continue;
          trip.emplace_back(j, N + k, d1(i, l));
          trip.emplace_back(N + j, k, d2(i, l));
        }
      }
    }
    SparseMatrix J(2 * N, 2 * N);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }

  double objective(const OptState& s) const override {
    check(s);
    double volume = 0.0, penalty = 0.0, tracking = 0.0;
    for (int t = 0; t < mesh_->num_triangles(); ++t) {
      const auto loc = local(s, t);
      const double area = mesh_->area(t);
      for (const auto& qp : rule_) {
        const double w = qp.weight * area;
        const double z = qp.bary.dot(loc.z);
        const double y = qp.bary.dot(loc.y);
        volume += w * std::cbrt(1.0 / law_.control(3.0 * qp.bary.dot(loc.q) * z));
        const double v = std::min(0.0, y + spec_.state_offset);
        penalty += w * v * v;
        if (spec_.tracking) {
          const double d = y - spec_.tracking->target(mesh_->map(t, qp.bary));
          tracking += w * d * d;
        }
      }
    }
    double J = volume + 0.5 * s.gamma * penalty;
    if (spec_.tracking) J += 0.5 * spec_.tracking->alpha * tracking;
    return J;
  }

  ActiveSets active_sets(const OptState& s) const override {
    check(s);
    ActiveSets a;
    a.points_per_triangle = static_cast<int>(rule_.size());
    const std::size_t total = rule_.size() * static_cast<std::size_t>(mesh_->num_triangles());
    a.control.reserve(total);
    a.state_active.reserve(total);
    for (int t = 0; t < mesh_->num_triangles(); ++t) {
      const auto loc = local(s, t);
      for (const auto& qp : rule_) {
        a.control.push_back(law_.classify(3.0 * qp.bary.dot(loc.q) * qp.bary.dot(loc.z)));
        a.state_active.push_back(qp.bary.dot(loc.y) + spec_.state_offset <= 0.0);
      }
    }
    return a;
  }

 private:
  struct Local {
    Eigen::Vector3d y, q, z;
  };

  Local local(const OptState& s, int t) const {
    const int N = mesh_->num_interior_vertices();
    Local loc;
    const auto& tri = mesh_->triangle(t);
    for (int i = 0; i < 3; ++i) {
      const int j = dofs_[t][i];
      loc.y[i] = j < 0 ? 0.0 : s.x[j];
      loc.q[i] = j < 0 ? 0.0 : s.x[N + j];
      loc.z[i] = datum_[tri[i]];
    }
    return loc;
  }

  ControlLaw law_;
  std::vector<QuadPoint> rule_;
  SparseMatrix stiffness_;
  SparseMatrix mass_;
  std::vector<std::array<int, 3>> dofs_;
  Eigen::VectorXd extra_load_;   // ∫ e phi_j
  Eigen::VectorXd target_load_;  // ∫ y_target phi_j
};

}  // namespace

std::unique_ptr<KktSystem> make_p1_system(const ProblemSpec& spec, MeshPtr mesh, int split_depth) {
  return std::make_unique<P1Kkt>(spec, std::move(mesh), split_depth);
}

}  // namespace plateopt::detail
