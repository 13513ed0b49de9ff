// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/camera.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ocnerf/errors.hpp"

namespace ocnerf {

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol * 3.0;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

void RigidTransform::validate() const {
  if (!is_rotation(rotation)) throw InputError("transform rotation is not orthonormal");
  if (!translation.allFinite()) throw InputError("transform translation is not finite");
}

Aabb Aabb::padded(double fraction) const {
  const Vec3 pad = fraction * extent();
  return {min - pad, max + pad};
}

std::optional<std::pair<double, double>> Aabb::intersect(const Vec3& origin, const Vec3& dir) const {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < min[a] || origin[a] > max[a]) return std::nullopt;
      continue;
    }
    const double inv = 1.0 / dir[a];
    double lo = (min[a] - origin[a]) * inv;
    double hi = (max[a] - origin[a]) * inv;
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
  }
  if (t0 > t1) return std::nullopt;
  return std::make_pair(t0, t1);
}

void CameraPose::validate() const {
  if (!is_rotation(rotation)) throw InputError("camera rotation is not orthonormal");
  if (!translation.allFinite()) throw InputError("camera translation is not finite");
  const auto& k = intrinsics;
  if (!(k.focal > 0.0) || !std::isfinite(k.focal)) throw InputError("camera focal length must be > 0");
  if (k.width < 1 || k.height < 1) throw InputError("camera image size must be >= 1");
  if (!std::isfinite(k.cx) || !std::isfinite(k.cy)) throw InputError("principal point is not finite");
}

std::optional<Eigen::Vector2d> CameraPose::project(const Vec3& world) const {
  const Vec3 local = rotation.transpose() * (world - translation);
  if (local.z() >= 0.0) return std::nullopt;
  const double depth = -local.z();
  const double u = intrinsics.cx + intrinsics.focal * local.x() / depth;
  const double v = intrinsics.cy - intrinsics.focal * local.y() / depth;
  return Eigen::Vector2d(u, v);
}

CameraPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up, const Intrinsics& intrinsics) {
  const Vec3 back = (eye - target).normalized();
  Vec3 right = up.cross(back);
  if (right.norm() < 1e-12) right = Vec3::UnitX().cross(back);
  right.normalize();
  const Vec3 true_up = back.cross(right);
  CameraPose pose;
  pose.rotation.col(0) = right;
  pose.rotation.col(1) = true_up;
  pose.rotation.col(2) = back;
  pose.translation = eye;
  pose.intrinsics = intrinsics;
  return pose;
}

Ray camera_ray(const CameraPose& pose, Pixel pixel, const RayBounds& bounds) {
  const auto& k = pose.intrinsics;
  if (pixel.row < 0 || pixel.col < 0 || pixel.row >= k.height || pixel.col >= k.width) {
    std::ostringstream msg;
    msg << "pixel (" << pixel.row << ", " << pixel.col << ") outside " << k.width << "x" << k.height
        << " image";
    throw InputError(msg.str());
  }
  const Vec3 local((pixel.col + 0.5 - k.cx) / k.focal, -(pixel.row + 0.5 - k.cy) / k.focal, -1.0);
  Ray ray;
  ray.origin = pose.translation;
  ray.direction = (pose.rotation * local.normalized()).normalized();
  ray.pixel = pixel;
  ray.near = bounds.default_near;
  ray.far = bounds.default_far;
  if (auto hit = bounds.bounds.padded(bounds.padding).intersect(ray.origin, ray.direction)) {
    const double near = std::max(hit->first, 0.0);
    if (hit->second > near) {
      ray.near = near;
      ray.far = hit->second;
    }
  }
  return ray;
}

}  // namespace ocnerf
