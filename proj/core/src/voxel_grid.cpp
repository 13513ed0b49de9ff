// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/voxel_grid.hpp"

#include <algorithm>
#include <cmath>

#include "ocnerf/errors.hpp"
#include "ocnerf/rng.hpp"

namespace ocnerf {

template <class T>
VoxelGrid<T>::VoxelGrid(const Vec3& origin, double cell_size, std::array<int, 3> dims, int scene_dim,
                        int object_dim)
    : origin_(origin), cell_size_(cell_size), dims_(dims), scene_dim_(scene_dim), object_dim_(object_dim) {
  if (!(cell_size > 0.0)) throw ConfigError("voxel grid cell size must be > 0");
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) throw ConfigError("voxel grid dims must be >= 1");
  if (scene_dim < 0 || object_dim < 0) throw ConfigError("voxel feature dims must be >= 0");
  scene_.assign(vertex_count() * static_cast<std::size_t>(scene_dim), T(0));
  object_.assign(vertex_count() * static_cast<std::size_t>(object_dim), T(0));
  occupancy_.assign(cell_count(), 1);
}

template <class T>
VoxelGrid<T> VoxelGrid<T>::covering(const Aabb& box, int resolution, int scene_dim, int object_dim) {
  if (resolution < 1) throw ConfigError("voxel grid resolution must be >= 1");
  const Vec3 extent = box.extent();
  const double cell = extent.maxCoeff() / resolution;
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) dims[a] = std::max(1, static_cast<int>(std::ceil(extent[a] / cell - 1e-9)));
  return VoxelGrid(box.min, cell, dims, scene_dim, object_dim);
}

template <class T>
std::size_t VoxelGrid<T>::vertex_count() const {
  return static_cast<std::size_t>(dims_[0] + 1) * (dims_[1] + 1) * (dims_[2] + 1);
}

template <class T>
std::size_t VoxelGrid<T>::cell_count() const {
  return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
}

template <class T>
Aabb VoxelGrid<T>::box() const {
  return {origin_, origin_ + cell_size_ * Vec3(dims_[0], dims_[1], dims_[2])};
}

template <class T>
std::int64_t VoxelGrid<T>::vertex_index(int i, int j, int k) const {
  return (static_cast<std::int64_t>(k) * (dims_[1] + 1) + j) * (dims_[0] + 1) + i;
}

template <class T>
std::span<T> VoxelGrid<T>::vertex_feature(FeatureGroup g, std::int64_t vertex) {
  const int dim = feature_dim(g);
  return features(g).subspan(static_cast<std::size_t>(vertex) * dim, static_cast<std::size_t>(dim));
}

template <class T>
void VoxelGrid<T>::init_uniform(double scale, std::uint64_t seed) {
  CounterRng rng(seed, 0x9121d);
  for (auto& v : scene_) v = static_cast<T>(rng.uniform(-scale, scale));
  for (auto& v : object_) v = static_cast<T>(rng.uniform(-scale, scale));
}

template <class T>
void VoxelGrid<T>::validate() const {
  auto finite = [](T v) { return std::isfinite(v); };
  if (!std::all_of(scene_.begin(), scene_.end(), finite) || !std::all_of(object_.begin(), object_.end(), finite))
    throw NumericError("voxel grid holds non-finite features");
}

template <class T>
TrilinearStencil VoxelGrid<T>::stencil(const Vec3& x) const {
  TrilinearStencil s;
  const Vec3 g = (x - origin_) / cell_size_;
  std::array<int, 3> base{};
  std::array<double, 3> u{};
  for (int a = 0; a < 3; ++a) {
    if (!(g[a] >= 0.0) || g[a] > dims_[a]) return s;
    base[a] = std::min(static_cast<int>(std::floor(g[a])), dims_[a] - 1);
    u[a] = g[a] - base[a];
  }
  s.inside = true;
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    s.vertex[c] = vertex_index(base[0] + dx, base[1] + dy, base[2] + dz);
    s.weight[c] = (dx ? u[0] : 1.0 - u[0]) * (dy ? u[1] : 1.0 - u[1]) * (dz ? u[2] : 1.0 - u[2]);
  }
  return s;
}

template <class T>
void VoxelGrid<T>::interpolate(const TrilinearStencil& s, FeatureGroup g, std::span<T> out) const {
  const int dim = feature_dim(g);
  std::fill(out.begin(), out.end(), T(0));
  if (!s.inside) return;
  const auto feats = features(g);
  for (int c = 0; c < 8; ++c) {
    const T w = static_cast<T>(s.weight[c]);
    const T* f = feats.data() + static_cast<std::size_t>(s.vertex[c]) * dim;
    for (int d = 0; d < dim; ++d) out[d] += w * f[d];
  }
}

template <class T>
bool VoxelGrid<T>::interpolate(const Vec3& x, FeatureGroup g, std::span<T> out) const {
  const TrilinearStencil s = stencil(x);
  interpolate(s, g, out);
  return s.inside;
}

template <class T>
void VoxelGrid<T>::scatter(const TrilinearStencil& s, int dim, std::span<const T> grad, std::span<T> buffer) {
  if (!s.inside) return;
  for (int c = 0; c < 8; ++c) {
    const T w = static_cast<T>(s.weight[c]);
    T* b = buffer.data() + static_cast<std::size_t>(s.vertex[c]) * dim;
    for (int d = 0; d < dim; ++d) b[d] += w * grad[d];
  }
}

template <class T>
Vec3 VoxelGrid<T>::normalize(const Vec3& x) const {
  const Aabb b = box();
  return (2.0 * (x - b.min).array() / b.extent().array() - 1.0).matrix();
}

template class VoxelGrid<float>;
template class VoxelGrid<double>;

}  // namespace ocnerf
