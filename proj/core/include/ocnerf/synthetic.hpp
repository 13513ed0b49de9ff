// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocnerf/camera.hpp"

namespace ocnerf {

enum class Shape { box, sphere };

/// Homogeneous solid. `pose` maps the primitive's local frame (centered at
/// the origin) to world; `size` holds box half-extents or, for spheres, the
/// radius in x.
struct Primitive {
  Shape shape = Shape::box;
  RigidTransform pose;
  Vec3 size = Vec3::Constant(0.5);
  double density = 50.0;
  Vec3 albedo = Vec3::Constant(0.5);
  int instance_id = 1;

  bool contains(const Vec3& x) const;
  /// Exact entry/exit distances of the ray with the solid (entry may be < 0).
  std::optional<std::pair<double, double>> intersect(const Vec3& origin, const Vec3& dir) const;
  /// World-space box enclosing the primitive.
  Aabb world_bounds() const;
};

struct SyntheticScene {
  std::vector<Primitive> primitives;
  Vec3 background = Vec3::Zero();
  Aabb bounds;

  /// Throws InputError on negative density, invalid ids or primitives poking out of bounds.
  void validate() const;
  int object_count() const;
  /// Same scene restricted to one instance.
  SyntheticScene only(int instance_id) const;
  /// Union of world bounds of every primitive with this id.
  std::optional<Aabb> instance_bounds(int instance_id) const;
};

struct FieldSample {
  double sigma = 0.0;
  Vec3 color = Vec3::Zero();
};

/// sigma = sum of densities containing x; color = density-weighted mean
/// albedo, or the background where sigma = 0.
FieldSample eval_analytic_field(const SyntheticScene& scene, const Vec3& x);

struct OraclePixel {
  Vec3 color = Vec3::Zero();
  double opacity = 0.0;
  double depth = 0.0;  // expected termination distance, far when empty
  int instance = 0;
};

/// Dense uniform quadrature of the analytic field along `ray` with `samples`
/// equal bins over [near, far], one sample at each bin center. A bin's
/// optical depth is the exact overlap of the bin with each primitive's chord
/// times its density. The instance id is the first
/// instance whose accumulated share of the opacity exceeds 0.5.
OraclePixel oracle_render_ray(const SyntheticScene& scene, const Ray& ray, int samples);

struct OracleImage {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;       // row-major, 3 per pixel
  std::vector<double> opacity;   // row-major
  std::vector<double> depth;     // row-major
  std::vector<std::uint8_t> mask;
};

OracleImage oracle_render_view(const SyntheticScene& scene, const CameraPose& pose, int samples,
                               const RayBounds& ray_bounds, int workers = 1);

RayBounds scene_ray_bounds(const SyntheticScene& scene);

/// Renders every pose with the oracle and writes the dataset directory
/// (poses.json, rgb/, mask/, depth/, scene.json). Throws InputError for a
/// degenerate pose or oracle_samples < 1024.
void generate_synthetic_scene(const SyntheticScene& scene, std::span<const CameraPose> poses, int oracle_samples,
                              const std::filesystem::path& out_dir, int workers = 1);

/// Built-in scenes used by the CLI and the acceptance suite.
SyntheticScene preset_scene(const std::string& name);
std::vector<std::string> preset_names();
/// Square pinhole intrinsics used by the preset rigs.
Intrinsics preset_intrinsics(int size);
/// `count` training cameras for a preset scene, at distance 3 looking at the origin.
std::vector<CameraPose> preset_rig(const std::string& name, int count, int size);
/// A few held-out cameras away from the training rig.
std::vector<CameraPose> preset_holdout(const std::string& name, int size);

/// `count` cameras on a ring of `radius` at `height`, looking at `target`,
/// starting at `start_angle` radians and spanning `arc` radians.
std::vector<CameraPose> ring_poses(int count, double radius, double height, const Vec3& target,
                                   const Intrinsics& intrinsics, double start_angle = 0.0,
                                   double arc = 6.283185307179586);

}  // namespace ocnerf
