#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "plateopt/mesh.hpp"

namespace plateopt {

/// Barycentric point with a weight relative to the triangle area
/// (weights of a rule sum to 1).
struct QuadPoint {
  Eigen::Vector3d bary;
  double weight;
};

/// Symmetric 3-point Gauss rule with interior points (2/3, 1/6, 1/6);
/// exact for quadratics.
std::span<const QuadPoint> gauss3();

/// gauss3 applied on each of the 4^depth congruent subtriangles obtained by
/// `depth` rounds of red refinement of the reference triangle.
std::vector<QuadPoint> subdivided_gauss3(int depth);

/// Sample locations used for maximum-norm estimates: corners, gauss3 points
/// and centroid.
std::span<const Eigen::Vector3d> linf_samples();

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Point(const Point&)>;

/// ∫_T f by gauss3.
double integrate(const Mesh& mesh, int t, const ScalarFunction& f);

using Region = int;
using Classifier = std::function<Region(const Point&)>;
using RegionIntegrand = std::function<double(Region, const Point&)>;

/// Integral over a triangle whose integrand switches formula across region
/// boundaries. The triangle is subdivided into 4^depth subtriangles and gauss3
/// is applied on each; every Gauss point evaluates the integrand with the
/// region it is classified into.
double split_quadrature(const std::array<Point, 3>& triangle, const Classifier& classify,
                        const RegionIntegrand& integrand, int depth = 2);

}  // namespace plateopt
