#include "plateopt/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace plateopt {

namespace {

constexpr double kSixth = 1.0 / 6.0;
constexpr double kTwoThirds = 2.0 / 3.0;

const std::array<QuadPoint, 3> kGauss3 = {{
    {Eigen::Vector3d(kTwoThirds, kSixth, kSixth), 1.0 / 3.0},
    {Eigen::Vector3d(kSixth, kTwoThirds, kSixth), 1.0 / 3.0},
    {Eigen::Vector3d(kSixth, kSixth, kTwoThirds), 1.0 / 3.0},
}};

const std::array<Eigen::Vector3d, 7> kLinfSamples = {{
    Eigen::Vector3d(1.0, 0.0, 0.0),
    Eigen::Vector3d(0.0, 1.0, 0.0),
    Eigen::Vector3d(0.0, 0.0, 1.0),
    Eigen::Vector3d(kTwoThirds, kSixth, kSixth),
    Eigen::Vector3d(kSixth, kTwoThirds, kSixth),
    Eigen::Vector3d(kSixth, kSixth, kTwoThirds),
    Eigen::Vector3d(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
}};

using BaryTriangle = std::array<Eigen::Vector3d, 3>;

void subdivide(const BaryTriangle& tri, int depth, std::vector<BaryTriangle>& out) {
  if (depth == 0) {
    out.push_back(tri);
    return;
  }
  const Eigen::Vector3d ab = 0.5 * (tri[0] + tri[1]);
  const Eigen::Vector3d bc = 0.5 * (tri[1] + tri[2]);
  const Eigen::Vector3d ca = 0.5 * (tri[2] + tri[0]);
  subdivide({tri[0], ab, ca}, depth - 1, out);
  subdivide({ab, tri[1], bc}, depth - 1, out);
  subdivide({ca, bc, tri[2]}, depth - 1, out);
  subdivide({ab, bc, ca}, depth - 1, out);
}

}  // namespace

std::span<const QuadPoint> gauss3() { return kGauss3; }

std::span<const Eigen::Vector3d> linf_samples() { return kLinfSamples; }

std::vector<QuadPoint> subdivided_gauss3(int depth) {
  if (depth < 0 || depth > 8) throw std::invalid_argument("subdivided_gauss3: depth out of range");
  std::vector<BaryTriangle> subs;
  subdivide({Eigen::Vector3d::Unit(0), Eigen::Vector3d::Unit(1), Eigen::Vector3d::Unit(2)},
            depth, subs);
  const double sub_weight = std::ldexp(1.0, -2 * depth);
  std::vector<QuadPoint> rule;
  rule.reserve(3 * subs.size());
  for (const auto& sub : subs) {
    for (const auto& qp : kGauss3) {
      rule.push_back({qp.bary[0] * sub[0] + qp.bary[1] * sub[1] + qp.bary[2] * sub[2],
                      qp.weight * sub_weight});
    }
  }
  return rule;
}

double integrate(const Mesh& mesh, int t, const ScalarFunction& f) {
  double sum = 0.0;
  for (const auto& qp : kGauss3) sum += qp.weight * f(mesh.map(t, qp.bary));
  return sum * mesh.area(t);
}

double split_quadrature(const std::array<Point, 3>& triangle, const Classifier& classify,
                        const RegionIntegrand& integrand, int depth) {
  const double area = 0.5 * std::abs((triangle[1].x() - triangle[0].x()) *
                                         (triangle[2].y() - triangle[0].y()) -
                                     (triangle[2].x() - triangle[0].x()) *
                                         (triangle[1].y() - triangle[0].y()));
  double sum = 0.0;
  for (const auto& qp : subdivided_gauss3(depth)) {
    const Point x = qp.bary[0] * triangle[0] + qp.bary[1] * triangle[1] + qp.bary[2] * triangle[2];
    sum += qp.weight * integrand(classify(x), x);
  }
  return sum * area;
}

}  // namespace plateopt
