// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/embedding.hpp"

#include "ocnerf/errors.hpp"

namespace ocnerf {

template <class T>
HybridEmbedding<T> hybrid_embed(const Vec3& x, const Vec3& d, const VoxelGrid<T>& grid, const EmbeddingConfig& cfg) {
  if (!x.allFinite() || !d.allFinite()) throw NumericError("hybrid_embed: non-finite point or direction");
  HybridEmbedding<T> e;
  const int ds = grid.feature_dim(FeatureGroup::scene);
  const int dobj = grid.feature_dim(FeatureGroup::object);
  e.stencil = grid.stencil(x);
  e.scene_feature.resize(static_cast<std::size_t>(ds));
  e.object_feature.resize(static_cast<std::size_t>(dobj));
  grid.interpolate(e.stencil, FeatureGroup::scene, std::span<T>(e.scene_feature));
  grid.interpolate(e.stencil, FeatureGroup::object, std::span<T>(e.object_feature));

  const Vec3 xn = grid.normalize(x);
  const std::array<T, 3> xv{static_cast<T>(xn.x()), static_cast<T>(xn.y()), static_cast<T>(xn.z())};
  const std::array<T, 3> dv{static_cast<T>(d.x()), static_cast<T>(d.y()), static_cast<T>(d.z())};

  const int xyz_dim = cfg.xyz.output_dim(3);
  e.space.resize(static_cast<std::size_t>(cfg.space_dim(ds)));
  positional_encode<T>(xv, cfg.xyz, std::span<T>(e.space).first(static_cast<std::size_t>(xyz_dim)));
  positional_encode<T>(e.scene_feature, cfg.feature, std::span<T>(e.space).subspan(static_cast<std::size_t>(xyz_dim)));
  e.dir = positional_encode<T>(dv, cfg.dir);
  e.object = positional_encode<T>(e.object_feature, cfg.feature);
  return e;
}

template <class T>
void hybrid_embed_backward(const HybridEmbedding<T>& emb, const VoxelGrid<T>& grid, const EmbeddingConfig& cfg,
                           std::span<const T> dspace, std::span<const T> dobject, std::span<T> scene_grad,
                           std::span<T> object_grad) {
  if (!emb.stencil.inside) return;
  const int xyz_dim = cfg.xyz.output_dim(3);
  if (!dspace.empty()) {
    std::vector<T> df(emb.scene_feature.size(), T(0));
    positional_encode_backward<T>(emb.scene_feature, cfg.feature, dspace.subspan(static_cast<std::size_t>(xyz_dim)),
                                  std::span<T>(df));
    VoxelGrid<T>::scatter(emb.stencil, grid.feature_dim(FeatureGroup::scene), df, scene_grad);
  }
  if (!dobject.empty()) {
    std::vector<T> df(emb.object_feature.size(), T(0));
    positional_encode_backward<T>(emb.object_feature, cfg.feature, dobject, std::span<T>(df));
    VoxelGrid<T>::scatter(emb.stencil, grid.feature_dim(FeatureGroup::object), df, object_grad);
  }
}

template HybridEmbedding<float> hybrid_embed(const Vec3&, const Vec3&, const VoxelGrid<float>&,
                                             const EmbeddingConfig&);
template HybridEmbedding<double> hybrid_embed(const Vec3&, const Vec3&, const VoxelGrid<double>&,
                                              const EmbeddingConfig&);
template void hybrid_embed_backward(const HybridEmbedding<float>&, const VoxelGrid<float>&, const EmbeddingConfig&,
                                    std::span<const float>, std::span<const float>, std::span<float>,
                                    std::span<float>);
template void hybrid_embed_backward(const HybridEmbedding<double>&, const VoxelGrid<double>&,
                                    const EmbeddingConfig&, std::span<const double>, std::span<const double>,
                                    std::span<double>, std::span<double>);

}  // namespace ocnerf
