// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "ocnerf/encoding.hpp"
#include "ocnerf/voxel_grid.hpp"

namespace ocnerf {

struct EmbeddingConfig {
  EncodingConfig xyz{6, true};
  EncodingConfig dir{4, true};
  EncodingConfig feature{2, true};

  int space_dim(int scene_feature_dim) const { return xyz.output_dim(3) + feature.output_dim(scene_feature_dim); }
  int dir_dim() const { return dir.output_dim(3); }
  int object_feature_dim(int object_feature_dim) const { return feature.output_dim(object_feature_dim); }
};

/// Network inputs for one point.
///   space  = [gamma(x_n), gamma(f_scn(x))]  (x_n: x mapped to [-1, 1]^3 by the grid box)
///   dir    = gamma(d)
///   object = gamma(f_obj(x))
template <class T>
struct HybridEmbedding {
  std::vector<T> space;
  std::vector<T> dir;
  std::vector<T> object;
  // Saved for the backward pass.
  TrilinearStencil stencil;
  std::vector<T> scene_feature;
  std::vector<T> object_feature;
};

/// Throws NumericError on non-finite x or d.
template <class T>
HybridEmbedding<T> hybrid_embed(const Vec3& x, const Vec3& d, const VoxelGrid<T>& grid, const EmbeddingConfig& cfg);

/// Scatters d(loss)/d(space) and d(loss)/d(object) into per-vertex feature
/// gradient buffers laid out like grid.features(). Either span may be empty.
template <class T>
void hybrid_embed_backward(const HybridEmbedding<T>& emb, const VoxelGrid<T>& grid, const EmbeddingConfig& cfg,
                           std::span<const T> dspace, std::span<const T> dobject, std::span<T> scene_grad,
                           std::span<T> object_grad);

}  // namespace ocnerf
