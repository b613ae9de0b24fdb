#include "plateopt/benchmarks.hpp"

#include <cmath>
#include <numbers>

namespace plateopt {

namespace example1 {

namespace {
constexpr double kInner = 0.125;
constexpr double kOuter = 0.375;
constexpr double kPi = std::numbers::pi;
}  // namespace

double radius(const Point& x) { return std::hypot(x[0] - 0.5, x[1] - 0.5); }

double state_profile(double r) {
  if (r <= kInner) return -0.1;
  if (r >= kOuter) return 0.0;
  return ((((614.4 * r - 768.0) * r + 352.0) * r - 72.0) * r + 27.0 / 4.0) * r - 27.0 / 80.0;
}

double state_profile_d1(double r) {
  if (r <= kInner || r >= kOuter) return 0.0;
  return (((3072.0 * r - 3072.0) * r + 1056.0) * r - 144.0) * r + 27.0 / 4.0;
}

double state_profile_d2(double r) {
  if (r <= kInner || r >= kOuter) return 0.0;
  return ((12288.0 * r - 9216.0) * r + 2112.0) * r - 144.0;
}

double adjoint_profile(double r) { return r < kInner ? -r * r + 1.0 / 64.0 : 0.0; }

double state_laplacian(double r) {
  if (r <= kInner || r >= kOuter) return 0.0;
  return state_profile_d2(r) + state_profile_d1(r) / r;
}

double state(const Point& x) { return state_profile(radius(x)); }

Point state_gradient(const Point& x) {
  const double r = radius(x);
  const double d = state_profile_d1(r);
  if (d == 0.0) return Point::Zero();
  return d / r * (x - Point(0.5, 0.5));
}

double adjoint(const Point& x) { return adjoint_profile(radius(x)); }

double datum(const Point& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); }

double control(const Point& x) {
  static const ControlLaw law(m, M);
  return law.control(3.0 * adjoint(x) * datum(x));
}

double thickness(const Point& x) { return std::cbrt(1.0 / control(x)); }

}  // namespace example1

Example1Values example1_exact(const Point& x) {
  using namespace example1;
  const double r = radius(x);
  Example1Values v;
  v.y = state_profile(r);
  v.q = adjoint_profile(r);
  v.z = datum(x);
  v.f = 2.0 * std::numbers::pi * std::numbers::pi * v.z;
  v.l = control(x);
  v.target = r < 0.125 ? -5.1 : v.y;
  v.residual_load = -state_laplacian(r) - v.z * v.l;
  return v;
}

ProblemSpec example1_spec(Discretization d) {
  ProblemSpec s;
  s.name = "ex1";
  s.state_offset = example1::tau;
  s.thickness_min = example1::m;
  s.thickness_max = example1::M;
  s.load = [](const Point& x) { return 2.0 * std::numbers::pi * std::numbers::pi * example1::datum(x); };
  Tracking t;
  t.alpha = example1::alpha;
  t.target = [](const Point& x) { return example1_exact(x).target; };
  t.residual_load = [](const Point& x) { return example1_exact(x).residual_load; };
  s.tracking = std::move(t);
  s.discretization = d;
  return s;
}

namespace example2 {
double load(const Point& x) { return x[0] <= 0.5 ? -0.04 : 0.01; }
}  // namespace example2

ProblemSpec example2_spec(Discretization d) {
  ProblemSpec s;
  s.name = "ex2";
  s.state_offset = example2::tau;
  s.thickness_min = example2::m;
  s.thickness_max = example2::M;
  s.load = example2::load;
  s.discretization = d;
  return s;
}

ManufacturedPoisson manufactured_poisson() {
  constexpr double pi = std::numbers::pi;
  ManufacturedPoisson p;
  p.y = [](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); };
  p.g = [](const Point& x) { return 2.0 * pi * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]); };
  p.gradient = [](const Point& x) {
    return Point(pi * std::cos(pi * x[0]) * std::sin(pi * x[1]), pi * std::sin(pi * x[0]) * std::cos(pi * x[1]));
  };
  return p;
}

}  // namespace plateopt
