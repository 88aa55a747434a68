#pragma once

#include <Eigen/Geometry>

#include "fragforge/chem/atom_cloud.hpp"

namespace fragforge::geometry {

using chem::Vec3;
using Mat3 = Eigen::Matrix3d;

// x -> rotation * x + translation, rotation proper orthonormal.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform rotation_about(const Vec3& axis, double angle, const Vec3& origin = Vec3::Zero());
  static RigidTransform translation_by(const Vec3& t) { return {Mat3::Identity(), t}; }

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  // (a * b)(x) == a(b(x))
  RigidTransform operator*(const RigidTransform& inner) const;
  RigidTransform inverse() const;
  bool is_proper(double tol = 1e-10) const;
};

chem::AtomCloud rigid_transform_apply(const RigidTransform& t, const chem::AtomCloud& cloud);

// Signed torsion p1-p2-p3-p4 in [-pi, pi], cis = 0, right-handed about p2->p3.
// Throws Error when p2 == p3 or an outer point is collinear with the axis.
double measure_dihedral(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4);

// Difference a - b wrapped into (-pi, pi].
double angle_difference(double a, double b);

// Minimum distance over all cross pairs; throws on an empty cloud.
double min_cross_distance(const chem::AtomCloud& a, const chem::AtomCloud& b);

}  // namespace fragforge::geometry
