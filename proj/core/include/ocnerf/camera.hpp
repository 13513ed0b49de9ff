// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ocnerf/geometry.hpp"

namespace ocnerf {

struct Intrinsics {
  double focal = 1.0;  // pixels
  double cx = 0.0;     // principal point, pixels
  double cy = 0.0;
  int width = 1;
  int height = 1;
};

/// Pinhole camera. `rotation` maps camera-frame vectors to world frame;
/// the camera looks down its local -z with +y up and +x right.
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Intrinsics intrinsics;

  /// Throws InputError on a non-orthonormal rotation, focal <= 0 or empty image.
  void validate() const;
  /// Projects a world point to continuous pixel coordinates (col, row).
  /// Returns nullopt for points at or behind the camera plane.
  std::optional<Eigen::Vector2d> project(const Vec3& world) const;
};

/// Camera at `eye` looking at `target`.
CameraPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up, const Intrinsics& intrinsics);

struct Pixel {
  int row = 0;
  int col = 0;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3(0.0, 0.0, -1.0);
  double near = 0.0;
  double far = 1.0;
  Pixel pixel;

  Vec3 at(double t) const { return origin + t * direction; }
};

/// How near/far are chosen for generated rays.
struct RayBounds {
  Aabb bounds;
  double padding = 0.01;  // fraction of the extent added on each side
  double default_near = 0.0;
  double default_far = 6.0;
};

/// Ray through the center of `pixel`. near/far come from the padded scene box,
/// or the configured defaults when the ray misses it.
Ray camera_ray(const CameraPose& pose, Pixel pixel, const RayBounds& bounds);

}  // namespace ocnerf
