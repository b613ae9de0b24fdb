#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "plateopt/quadrature.hpp"

namespace plateopt {

enum class Discretization { rt0, p1 };

std::string_view to_string(Discretization d);
Discretization parse_discretization(std::string_view s);

/// Extra terms of a manufactured benchmark: the cost gains
/// (alpha/2)||y - target||^2 and the state equation gains the load
/// `residual_load` (-Δy = z l + e).
struct Tracking {
  double alpha = 0.0;
  ScalarFunction target;
  ScalarFunction residual_load;
};

/// Thickness bounds [thickness_min, thickness_max], state bound y >= -state_offset,
/// transverse load and discretization of one plate design problem.
struct ProblemSpec {
  std::string name;
  double state_offset = 0.0;    // tau
  double thickness_min = 0.0;   // m
  double thickness_max = 0.0;   // M
  ScalarFunction load;
  std::optional<Tracking> tracking;
  Discretization discretization = Discretization::rt0;

  /// Throws std::invalid_argument unless 0 < m < M, tau > 0 and a load is set.
  void validate() const;

  double control_min() const;  // M^-3
  double control_max() const;  // m^-3
  double projection_min() const;  // m^4
  double projection_max() const;  // M^4
};

enum class ControlRegion : unsigned char {
  inactive,     // m^4 < 3qz < M^4
  lower_clamp,  // 3qz >= M^4, l = M^-3
  upper_clamp,  // 3qz <= m^4, l = m^-3
};

/// Pointwise control law l = (P_[m^4, M^4](s))^(-3/4) with s = 3 q z.
class ControlLaw {
 public:
  explicit ControlLaw(const ProblemSpec& spec);
  ControlLaw(double thickness_min, double thickness_max);

  ControlRegion classify(double s) const {
    if (s >= hi_) return ControlRegion::lower_clamp;
    if (s <= lo_) return ControlRegion::upper_clamp;
    return ControlRegion::inactive;
  }
  /// Control value; exactly M^-3 or m^-3 on the clamped regions.
  double control(double s) const;
  /// dl/ds: -(3/4) s^(-7/4) inside, 0 on the clamped regions and their boundary.
  double derivative(double s) const;

  double control_min() const { return l_min_; }
  double control_max() const { return l_max_; }
  double projection_min() const { return lo_; }
  double projection_max() const { return hi_; }

 private:
  double lo_, hi_, l_min_, l_max_;
};

/// u = l^(-1/3); throws std::domain_error when l leaves [M^-3, m^-3].
double thickness_from_control(double l, const ProblemSpec& spec);

/// Moreau-Yosida multiplier gamma (y + tau)^-.
inline double moreau_yosida(double y, double gamma, double tau) {
  const double s = y + tau;
  return s < 0.0 ? gamma * s : 0.0;
}

}  // namespace plateopt
