#include "plateopt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace plateopt {

std::string_view to_string(Discretization d) { return d == Discretization::rt0 ? "rt0" : "p1"; }

Discretization parse_discretization(std::string_view s) {
  if (s == "rt0") return Discretization::rt0;
  if (s == "p1") return Discretization::p1;
  throw std::invalid_argument("unknown discretization '" + std::string(s) + "' (expected rt0 or p1)");
}

void ProblemSpec::validate() const {
  if (!(state_offset > 0.0)) throw std::invalid_argument("ProblemSpec: state offset tau must be > 0");
  if (!(thickness_min > 0.0 && thickness_min < thickness_max)) {
    throw std::invalid_argument("ProblemSpec: thickness bounds need 0 < m < M");
  }
  if (!load) throw std::invalid_argument("ProblemSpec: load is not set");
  if (tracking) {
    if (!(tracking->alpha >= 0.0)) throw std::invalid_argument("ProblemSpec: tracking alpha must be >= 0");
    if (!tracking->target || !tracking->residual_load) {
      throw std::invalid_argument("ProblemSpec: tracking target and residual load must be set");
    }
  }
}

double ProblemSpec::control_min() const { return 1.0 / (thickness_max * thickness_max * thickness_max); }
double ProblemSpec::control_max() const { return 1.0 / (thickness_min * thickness_min * thickness_min); }
double ProblemSpec::projection_min() const { return std::pow(thickness_min, 4); }
double ProblemSpec::projection_max() const { return std::pow(thickness_max, 4); }

ControlLaw::ControlLaw(const ProblemSpec& spec) : ControlLaw(spec.thickness_min, spec.thickness_max) {}

ControlLaw::ControlLaw(double m, double M)
    : lo_(std::pow(m, 4)), hi_(std::pow(M, 4)), l_min_(1.0 / (M * M * M)), l_max_(1.0 / (m * m * m)) {
  if (!(m > 0.0 && m < M)) throw std::invalid_argument("ControlLaw: thickness bounds need 0 < m < M");
}

double ControlLaw::control(double s) const {
  switch (classify(s)) {
    case ControlRegion::lower_clamp: return l_min_;
    case ControlRegion::upper_clamp: return l_max_;
    case ControlRegion::inactive: break;
  }
  return std::clamp(std::pow(s, -0.75), l_min_, l_max_);
}

double ControlLaw::derivative(double s) const {
  if (classify(s) != ControlRegion::inactive) return 0.0;
  return -0.75 * std::pow(s, -1.75);
}

double thickness_from_control(double l, const ProblemSpec& spec) {
  const double lo = spec.control_min();
  const double hi = spec.control_max();
  constexpr double kRel = 1e-12;
  if (!(l >= lo * (1.0 - kRel) && l <= hi * (1.0 + kRel))) {
    throw std::domain_error("control value " + std::to_string(l) + " outside [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + "]");
  }
  return std::clamp(std::cbrt(1.0 / l), spec.thickness_min, spec.thickness_max);
}

}  // namespace plateopt
