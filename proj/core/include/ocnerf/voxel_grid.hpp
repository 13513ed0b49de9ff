// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ocnerf/geometry.hpp"

namespace ocnerf {

enum class FeatureGroup { scene, object };

/// The 8 vertices around a point and their trilinear weights. Corner c
/// (bits x, y, z) has weight prod(bit ? u : 1 - u) of the in-cell offset u.
struct TrilinearStencil {
  std::array<std::int64_t, 8> vertex{};
  std::array<double, 8> weight{};
  bool inside = false;
};

/// Dense axis-aligned grid of learnable per-vertex features: one channel
/// group for the scene branch and one for the object branch.
template <class T>
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin, double cell_size, std::array<int, 3> dims, int scene_dim, int object_dim);
  /// Cubic cells, `resolution` cells along the longest axis of `box`.
  static VoxelGrid covering(const Aabb& box, int resolution, int scene_dim, int object_dim);

  const Vec3& origin() const { return origin_; }
  double cell_size() const { return cell_size_; }
  const std::array<int, 3>& dims() const { return dims_; }
  int feature_dim(FeatureGroup g) const { return g == FeatureGroup::scene ? scene_dim_ : object_dim_; }
  std::size_t vertex_count() const;
  std::size_t cell_count() const;
  Aabb box() const;

  std::span<T> features(FeatureGroup g) { return g == FeatureGroup::scene ? scene_ : object_; }
  std::span<const T> features(FeatureGroup g) const { return g == FeatureGroup::scene ? scene_ : object_; }
  std::span<T> vertex_feature(FeatureGroup g, std::int64_t vertex);
  std::int64_t vertex_index(int i, int j, int k) const;

  std::vector<std::uint8_t>& occupancy() { return occupancy_; }
  const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

  /// Zero-mean uniform init in [-scale, scale].
  void init_uniform(double scale, std::uint64_t seed);
  /// Throws NumericError when any feature is non-finite.
  void validate() const;

  TrilinearStencil stencil(const Vec3& x) const;
  /// Writes the blended feature; outside the grid writes zeros and returns false.
  bool interpolate(const Vec3& x, FeatureGroup g, std::span<T> out) const;
  void interpolate(const TrilinearStencil& s, FeatureGroup g, std::span<T> out) const;
  /// grad_buffer[vertex][c] += weight * grad[c] for each stencil vertex.
  static void scatter(const TrilinearStencil& s, int dim, std::span<const T> grad, std::span<T> grad_buffer);

  /// Maps the grid box onto [-1, 1]^3.
  Vec3 normalize(const Vec3& x) const;

 private:
  Vec3 origin_ = Vec3::Zero();
  double cell_size_ = 1.0;
  std::array<int, 3> dims_{1, 1, 1};
  int scene_dim_ = 0;
  int object_dim_ = 0;
  std::vector<T> scene_;
  std::vector<T> object_;
  std::vector<std::uint8_t> occupancy_;
};

}  // namespace ocnerf
