// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/occlusion.hpp"

#include <algorithm>
#include <cmath>

#include "ocnerf/errors.hpp"

namespace ocnerf {

void GuardConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("guard epsilon must be > 0");
  if (importance < 0) throw ConfigError("importance sample count must be >= 0");
  if (!(weight_floor >= 0.0)) throw ConfigError("importance weight floor must be >= 0");
}

std::size_t GuardDecision::pruned() const {
  return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), std::uint8_t{0}));
}

void GuardStats::add(const GuardStats& other) {
  samples += other.samples;
  pruned += other.pruned;
  nonfinite_depth += other.nonfinite_depth;
}

double GuardStats::pruned_fraction() const {
  return samples == 0 ? 0.0 : static_cast<double>(pruned) / static_cast<double>(samples);
}

GuardDecision guard_mask(const SampleSet& samples, double depth, int mask_value, const GuardConfig& cfg,
                         GuardStats* stats) {
  const std::size_t n = samples.size();
  GuardDecision out;
  out.keep.assign(n, 1);
  out.reason.assign(n, GuardReason::before_guard_depth);
  const bool finite = std::isfinite(depth);
  if (stats) {
    stats->samples += n;
    if (!finite && mask_value != 1) ++stats->nonfinite_depth;
  }
  if (mask_value == 1) {
    std::fill(out.reason.begin(), out.reason.end(), GuardReason::in_mask_frustum);
    return out;
  }
  if (!cfg.guard || !finite) return out;
  const double limit = depth + cfg.epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    if (samples.t[i] > limit) {
      out.keep[i] = 0;
      out.reason[i] = GuardReason::pruned_occluded;
    }
  }
  if (stats) stats->pruned += out.pruned();
  return out;
}

template <class T>
GuardedSamples guarded_object_pass(const Ray& ray, const SampleSet& scene_samples,
                                   const RenderResult<T>& scene_result, int mask_value, const GuardConfig& cfg,
                                   std::uint64_t seed, GuardStats* stats) {
  std::vector<double> weights(scene_samples.size(), 0.0);
  if (cfg.scene_guidance) {
    if (scene_result.weights.size() != scene_samples.size())
      throw InputError("scene weights do not match the scene samples");
    for (std::size_t i = 0; i < weights.size(); ++i)
      weights[i] = std::max(0.0, static_cast<double>(scene_result.weights[i]));
  }
  GuardedSamples out;
  out.samples = importance_resample(ray, scene_samples, weights, cfg.importance, seed,
                                    cfg.scene_guidance ? cfg.weight_floor : 0.0);
  out.decision = guard_mask(out.samples, static_cast<double>(scene_result.terminal_depth), mask_value, cfg, stats);
  out.samples.keep = out.decision.keep;
  return out;
}

template GuardedSamples guarded_object_pass(const Ray&, const SampleSet&, const RenderResult<float>&, int,
                                            const GuardConfig&, std::uint64_t, GuardStats*);
template GuardedSamples guarded_object_pass(const Ray&, const SampleSet&, const RenderResult<double>&, int,
                                            const GuardConfig&, std::uint64_t, GuardStats*);

}  // namespace ocnerf
