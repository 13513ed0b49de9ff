// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ocnerf/composite.hpp"
#include "ocnerf/field_network.hpp"
#include "ocnerf/synthetic.hpp"

namespace ocnerf {

struct RenderConfig {
  int samples = 64;
  bool jitter = false;
  std::uint64_t seed = 0;
  RayBounds ray_bounds;
  Vec3 background = Vec3::Zero();
  int chunk_rays = 64;
  int workers = 1;
};

/// Stratified samples for `ray`, seeded by (cfg.seed, pixel).
SampleSet ray_samples(const Ray& ray, const RenderConfig& cfg);

/// Per-sample branch outputs for a batch of points.
template <class T>
struct FieldValues {
  std::vector<T> sigma;
  RgbBlock<T> color;
};

/// Inference-only evaluation of one branch; object id k is used for every point.
template <class T>
FieldValues<T> evaluate_branch(const FieldNetwork<T>& net, BranchKind kind, int k, std::span<const Vec3> x,
                               std::span<const Vec3> d);

/// Sample -> embed -> forward -> composite on fixed samples. The scene branch
/// composites over cfg.background, the object branch over black.
template <class T>
RenderResult<T> render_samples(const FieldNetwork<T>& net, BranchKind kind, int k, const Ray& ray,
                               const SampleSet& samples, const Vec3& background);

template <class T>
RenderResult<T> render_ray(const FieldNetwork<T>& net, BranchKind kind, int k, const Ray& ray,
                           const RenderConfig& cfg);

/// Batched render_ray over many rays, chunked and run on cfg.workers threads.
template <class T>
std::vector<RenderResult<T>> render_rays(const FieldNetwork<T>& net, BranchKind kind, int k,
                                         std::span<const Ray> rays, const RenderConfig& cfg);

using AnalyticField = std::function<FieldSample(const Vec3&)>;

/// render_samples with an analytic field in place of the network.
RenderResult<double> render_samples(const AnalyticField& field, const SampleSet& samples, const Vec3& background);

/// Row-major rays for every pixel of `pose`.
std::vector<Ray> view_rays(const CameraPose& pose, const RayBounds& bounds);

/// Per-pixel branch render of a full view.
struct BranchImage {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;
  std::vector<double> opacity;
  std::vector<double> depth;
};

BranchImage render_branch_view(const FieldNetwork<float>& net, BranchKind kind, int k, const CameraPose& pose,
                               const RenderConfig& cfg);

}  // namespace ocnerf
