// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <utility>

namespace ocnerf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// True when R^T R = I and det(R) = +1, both within `tol`.
bool is_rotation(const Mat3& r, double tol = 1e-6);

/// x -> rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform translate(const Vec3& t) { return {Mat3::Identity(), t}; }

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  Vec3 apply_direction(const Vec3& d) const { return rotation * d; }
  RigidTransform inverse() const;
  /// (a * b).apply(x) == a.apply(b.apply(x))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b);
  /// Throws InputError when the rotation is not orthonormal.
  void validate() const;
};

struct Aabb {
  Vec3 min = Vec3::Constant(-1.0);
  Vec3 max = Vec3::Constant(1.0);

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool contains(const Vec3& x) const {
    return (x.array() >= min.array()).all() && (x.array() <= max.array()).all();
  }
  /// Grows each side by `fraction` of the extent along that axis.
  Aabb padded(double fraction) const;
  /// Slab test; returns the parametric entry/exit distances of origin + t * dir.
  std::optional<std::pair<double, double>> intersect(const Vec3& origin, const Vec3& dir) const;
};

}  // namespace ocnerf
