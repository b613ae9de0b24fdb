#pragma once

#include "plateopt/problem.hpp"

namespace plateopt {

/// Closed-form fields of the manufactured plate benchmark (Example 1).
struct Example1Values {
  double y = 0.0;       // state
  double q = 0.0;       // adjoint
  double l = 0.0;       // control
  double z = 0.0;       // datum sin(pi x1) sin(pi x2)
  double f = 0.0;       // load 2 pi^2 z
  double target = 0.0;  // y_target
  double residual_load = 0.0;  // e = -Lap y - z l
};

namespace example1 {
inline constexpr double tau = 0.1;
inline constexpr double m = 0.35;
inline constexpr double M = 0.45;
inline constexpr double alpha = 1.0;

double radius(const Point& x);
/// Radial profile of the state and its first two derivatives.
double state_profile(double r);
double state_profile_d1(double r);
double state_profile_d2(double r);
double adjoint_profile(double r);
/// Lap (y o r); 0 off the band 1/8 < r < 3/8.
double state_laplacian(double r);

double state(const Point& x);
Point state_gradient(const Point& x);
double adjoint(const Point& x);
double datum(const Point& x);
double control(const Point& x);
double thickness(const Point& x);
}  // namespace example1

Example1Values example1_exact(const Point& x);

ProblemSpec example1_spec(Discretization d = Discretization::rt0);
ProblemSpec example2_spec(Discretization d = Discretization::rt0);

namespace example2 {
inline constexpr double tau = 0.01;
inline constexpr double m = 0.1;
inline constexpr double M = 0.2;
double load(const Point& x);
}  // namespace example2

/// -Lap y = g with y = sin(pi x1) sin(pi x2) on the unit square.
struct ManufacturedPoisson {
  ScalarFunction g;
  ScalarFunction y;
  VectorFunction gradient;
};

ManufacturedPoisson manufactured_poisson();

}  // namespace plateopt
