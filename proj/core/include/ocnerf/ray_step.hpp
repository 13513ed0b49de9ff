// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ocnerf/field_network.hpp"
#include "ocnerf/losses.hpp"
#include "ocnerf/occlusion.hpp"

namespace ocnerf {

/// One supervised training ray.
struct TrainRay {
  Ray ray;
  Vec3 color = Vec3::Zero();
  int object = 1;
  std::uint8_t mask = 0;
  double weight = 1.0;
  double depth = std::numeric_limits<double>::quiet_NaN();
};

struct StepConfig {
  int samples = 64;
  bool jitter = true;
  GuardConfig guard;
  LossConfig loss;
  Vec3 background = Vec3::Zero();
  int chunk_rays = 32;
  /// Fixed number of gradient accumulators; results do not depend on workers.
  int shards = 4;
  int workers = 1;

  void validate() const;
};

/// Samples used for one ray: scene stratified samples plus the guided and
/// guarded object samples.
struct RayPlan {
  SampleSet scene;
  GuardedSamples object;
};

/// Per-ray object-branch composite gradients over all (kept and pruned) samples.
template <class T>
struct StepTrace {
  std::vector<std::vector<T>> object_dsigma;
  std::vector<RgbBlock<T>> object_dcolor;
  std::vector<RenderResult<T>> scene;
  std::vector<RenderResult<T>> object;
};

struct StepOutput {
  double scene_loss = 0.0;
  double object_loss = 0.0;
  GuardStats stats;
  std::vector<RayPlan> plans;
};

/// Plans every ray of the batch with the current parameters (detached).
template <class T>
std::vector<RayPlan> plan_rays(const FieldNetwork<T>& net, std::span<const TrainRay> rays, const StepConfig& cfg,
                               std::uint64_t seed);

/// Scene pass, guidance + guard, object pass and both losses for a batch.
/// With `plans` the given samples are reused (the guard is not re-evaluated);
/// otherwise rays are planned inline from this pass's scene renders. Gradients
/// of L_scn + L_obj are accumulated into `grad` when given.
template <class T>
StepOutput ray_step(const FieldNetwork<T>& net, std::span<const TrainRay> rays, const StepConfig& cfg,
                    std::uint64_t seed, const std::vector<RayPlan>* plans, FieldGrad<T>* grad,
                    StepTrace<T>* trace = nullptr);

}  // namespace ocnerf
