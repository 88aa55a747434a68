#include "fragforge/geometry/transform.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fragforge/error.hpp"

namespace fragforge::geometry {

RigidTransform RigidTransform::rotation_about(const Vec3& axis, double angle, const Vec3& origin) {
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  t.translation = origin - t.rotation * origin;
  return t;
}

RigidTransform RigidTransform::operator*(const RigidTransform& inner) const {
  return {rotation * inner.rotation, rotation * inner.translation + translation};
}

RigidTransform RigidTransform::inverse() const {
  Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

bool RigidTransform::is_proper(double tol) const {
  return (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < tol &&
         std::abs(rotation.determinant() - 1.0) < tol;
}

chem::AtomCloud rigid_transform_apply(const RigidTransform& t, const chem::AtomCloud& cloud) {
  chem::AtomCloud out = cloud;
  for (std::size_t i = 0; i < out.size(); ++i) out.position(i) = t.apply(cloud.position(i));
  return out;
}

double measure_dihedral(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4) {
  const Vec3 b1 = p2 - p1;
  const Vec3 b2 = p3 - p2;
  const Vec3 b3 = p4 - p3;
  const double axis = b2.norm();
  if (axis < 1e-12) throw Error("dihedral: central atoms coincide");
  const Vec3 n1 = b1.cross(b2);
  const Vec3 n2 = b2.cross(b3);
  constexpr double kMinSin = 1e-9;
  if (n1.norm() <= kMinSin * b1.norm() * axis || n2.norm() <= kMinSin * b3.norm() * axis) {
    throw Error("dihedral: outer atom collinear with the central bond");
  }
  return std::atan2(axis * b1.dot(n2), n1.dot(n2));
}

double angle_difference(double a, double b) {
  double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  if (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
  return d;
}

double min_cross_distance(const chem::AtomCloud& a, const chem::AtomCloud& b) {
  if (a.empty() || b.empty()) throw Error("min_cross_distance: empty cloud");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : a.atoms()) {
    for (const auto& y : b.atoms()) best = std::min(best, (x.position - y.position).squaredNorm());
  }
  return std::sqrt(best);
}

}  // namespace fragforge::geometry
