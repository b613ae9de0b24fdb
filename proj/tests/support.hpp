#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "plateopt/kkt.hpp"

namespace plateopt::testing {

/// Random iterate whose state straddles y = -tau and whose control argument
/// 3qz straddles both projection bounds.
inline OptState random_state(const KktSystem& sys, std::mt19937& rng, double gamma) {
  const ProblemSpec& spec = sys.spec();
  const Mesh& m = *sys.mesh();
  OptState s = sys.zero_state(gamma);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> y_dist(-spec.state_offset - 0.15, spec.state_offset + 0.05);
  std::uniform_real_distribution<double> s_dist(0.5 * spec.projection_min(), 1.5 * spec.projection_max());
  auto q_for = [&](double z) { return s_dist(rng) / (3.0 * std::max(z, 1e-3)); };
  if (spec.discretization == Discretization::rt0) {
    const int E = m.num_edges(), T = m.num_triangles(), n = E + T;
    for (int e = 0; e < E; ++e) {
      s.x[e] = 0.01 * normal(rng);
      s.x[n + e] = 0.001 * normal(rng);
    }
    for (int t = 0; t < T; ++t) {
      s.x[E + t] = y_dist(rng);
      s.x[n + E + t] = q_for(sys.datum()[t]);
    }
  } else {
    const int N = m.num_interior_vertices();
    for (int i = 0; i < N; ++i) {
      s.x[i] = y_dist(rng);
      s.x[N + i] = q_for(sys.datum()[m.interior_vertex(i)]);
    }
  }
  return s;
}

inline bool same_sets(const ActiveSets& a, const ActiveSets& b) {
  return a.control == b.control && a.state_active == b.state_active;
}

struct FdCheck {
  double rel_error = 0.0;
  bool stable = false;
};

/// ||(F(x + eps d) - F(x)) / eps - DF(x) d|| / ||DF(x) d|| for a random unit
/// direction d; `stable` is false when a classification flips along the step.
inline FdCheck fd_check(const KktSystem& sys, const OptState& x, std::mt19937& rng, double eps = 1e-6) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd d(x.x.size());
  for (auto& v : d) v = normal(rng);
  d.normalize();
  OptState xp = x, xm = x;
  xp.x += eps * d;
  xm.x -= eps * d;
  FdCheck out;
  const ActiveSets a = sys.active_sets(x);
  out.stable = same_sets(a, sys.active_sets(xp)) && same_sets(a, sys.active_sets(xm));
  const Eigen::VectorXd jd = sys.jacobian(x) * d;
  const Eigen::VectorXd fd = (sys.residual(xp) - sys.residual(xm)) / (2 * eps);
  out.rel_error = (fd - jd).norm() / jd.norm();
  return out;
}

}  // namespace plateopt::testing
