// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ocnerf/branch.hpp"
#include "ocnerf/embedding.hpp"
#include "ocnerf/geometry.hpp"
#include "ocnerf/voxel_grid.hpp"

namespace ocnerf {

struct NetworkConfig {
  EmbeddingConfig embedding;
  Aabb bounds;
  int grid_resolution = 32;
  int scene_feature_dim = 16;
  int object_feature_dim = 16;
  int scene_depth = 4;
  int scene_width = 128;
  int object_depth = 4;
  int object_width = 128;
  int color_width = 64;
  int code_dim = 32;
  int object_count = 1;
  double grid_init_scale = 1e-2;
  double code_init_scale = 1e-2;
  double density_bias_init = 0.0;

  BranchConfig scene_branch() const;
  BranchConfig object_branch() const;
  /// Throws ConfigError for non-positive sizes or K < 1.
  void validate() const;
};

/// Learnable activation codes l^k, k = 1..K.
template <class T>
class ObjectCodeLibrary {
 public:
  ObjectCodeLibrary() = default;
  ObjectCodeLibrary(int count, int dim) : count_(count), dim_(dim), codes_(static_cast<std::size_t>(count * dim)) {}

  int count() const { return count_; }
  int dim() const { return dim_; }
  /// Code of object k (1-based). Throws InputError when k is outside 1..K.
  std::span<T> code(int k);
  std::span<const T> code(int k) const;
  std::span<T> data() { return codes_; }
  std::span<const T> data() const { return codes_; }

 private:
  int count_ = 0;
  int dim_ = 0;
  std::vector<T> codes_;
};

/// Same as code_lookup: the library's k-th code.
template <class T>
std::span<const T> code_lookup(const ObjectCodeLibrary<T>& library, int k) {
  return library.code(k);
}

enum class BranchKind { scene, object };

/// Gradient buffers shaped like every trainable tensor of a FieldNetwork.
template <class T>
struct FieldGrad {
  Branch<T> scene;
  Branch<T> object;
  std::vector<T> codes;
  std::vector<T> grid_scene;
  std::vector<T> grid_object;

  void set_zero();
  void add(const FieldGrad& other);
  void visit(const TensorVisitor<T>& fn);
  /// True when every entry is exactly zero.
  bool is_zero();
};

/// Forward record for one batch of points through one branch.
template <class T>
struct FieldEval {
  BranchKind kind = BranchKind::scene;
  std::uint64_t version = 0;
  std::vector<int> objects;
  std::vector<TrilinearStencil> stencils;
  Matrix<T> input;
  Matrix<T> dir;
  Matrix<T> scene_feature;
  Matrix<T> object_feature;
  BranchCache<T> cache;
  BranchOutput<T> out;

  Eigen::Index size() const { return input.cols(); }
};

/// Scene branch + object branch + code library + shared voxel grid.
template <class T>
class FieldNetwork {
 public:
  FieldNetwork() = default;
  explicit FieldNetwork(const NetworkConfig& cfg);
  static FieldNetwork init(const NetworkConfig& cfg, std::uint64_t seed);

  const NetworkConfig& config() const { return cfg_; }
  const VoxelGrid<T>& grid() const { return grid_; }
  const Branch<T>& scene_branch() const { return scene_; }
  const Branch<T>& object_branch() const { return object_; }
  const ObjectCodeLibrary<T>& codes() const { return codes_; }
  // Mutable access invalidates outstanding forward records.
  VoxelGrid<T>& grid() { ++version_; return grid_; }
  Branch<T>& scene_branch() { ++version_; return scene_; }
  Branch<T>& object_branch() { ++version_; return object_; }
  ObjectCodeLibrary<T>& codes() { ++version_; return codes_; }

  std::uint64_t version() const { return version_; }
  void mark_updated() { ++version_; }

  /// Evaluates a branch at points x with view directions d. `objects`
  /// holds one 1-based object id per point for the object branch and is
  /// ignored for the scene branch. With record = false no activations are
  /// kept and the result cannot be passed to backward().
  FieldEval<T> forward(BranchKind kind, std::span<const Vec3> x, std::span<const Vec3> d,
                       std::span<const int> objects = {}, bool record = true) const;
  /// Accumulates gradients of d(loss)/d(sigma), d(loss)/d(color) into grad.
  /// Throws UsageError when parameters changed since the forward pass.
  void backward(const FieldEval<T>& eval, const Eigen::Matrix<T, 1, Eigen::Dynamic>& dsigma,
                const Eigen::Matrix<T, 3, Eigen::Dynamic>& dcolor, FieldGrad<T>& grad) const;

  FieldGrad<T> zero_grad() const;
  /// Visits every trainable tensor in a fixed order (same as FieldGrad::visit).
  void visit_parameters(const TensorVisitor<T>& fn);
  std::size_t parameter_count() const;

  /// Converts to another precision (checkpoints are float32).
  template <class U>
  FieldNetwork<U> cast() const {
    FieldNetwork<U> out(cfg_);
    FieldNetwork<T> src = *this;
    std::vector<std::span<T>> from;
    src.visit_parameters([&](const std::string&, std::span<T> v, const auto&) { from.push_back(v); });
    std::size_t i = 0;
    out.visit_parameters([&](const std::string&, std::span<U> v, const auto&) {
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = static_cast<U>(from[i][j]);
      ++i;
    });
    out.grid_.occupancy() = grid_.occupancy();
    return out;
  }

 private:
  template <class U>
  friend class FieldNetwork;

  NetworkConfig cfg_;
  VoxelGrid<T> grid_;
  Branch<T> scene_;
  Branch<T> object_;
  ObjectCodeLibrary<T> codes_;
  std::uint64_t version_ = 1;
};

/// True for tensors stored on the voxel grid (they get their own learning rate).
bool is_grid_tensor(const std::string& name);

}  // namespace ocnerf
