// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ocnerf/composite.hpp"
#include "ocnerf/sampling.hpp"

namespace ocnerf {

struct GuardConfig {
  double epsilon = 0.05;
  /// Off: every object sample is kept (same as epsilon = +inf).
  bool guard = true;
  /// Off: the object branch gets N + N_imp uniform stratified-like samples
  /// instead of samples drawn from the scene weights.
  bool scene_guidance = true;
  int importance = 32;
  double weight_floor = 1e-3;

  /// Throws ConfigError unless epsilon > 0 and importance >= 0.
  void validate() const;
};

enum class GuardReason : std::uint8_t { in_mask_frustum, before_guard_depth, pruned_occluded };

struct GuardDecision {
  std::vector<std::uint8_t> keep;
  std::vector<GuardReason> reason;

  std::size_t pruned() const;
};

/// Diagnostic counters, summed over rays.
struct GuardStats {
  std::uint64_t samples = 0;
  std::uint64_t pruned = 0;
  std::uint64_t nonfinite_depth = 0;

  void add(const GuardStats& other);
  double pruned_fraction() const;
};

/// mask_value = 1 keeps everything. Otherwise samples with t <= depth + epsilon
/// are kept and the rest pruned. A non-finite depth keeps everything and
/// bumps stats->nonfinite_depth.
GuardDecision guard_mask(const SampleSet& samples, double depth, int mask_value, const GuardConfig& cfg,
                         GuardStats* stats = nullptr);

struct GuardedSamples {
  SampleSet samples;  // keep flags set from `decision`
  GuardDecision decision;
};

/// Scene guidance (importance resampling on the scene weights) followed by the
/// guard mask at the scene branch's terminal depth.
template <class T>
GuardedSamples guarded_object_pass(const Ray& ray, const SampleSet& scene_samples,
                                   const RenderResult<T>& scene_result, int mask_value, const GuardConfig& cfg,
                                   std::uint64_t seed, GuardStats* stats = nullptr);

}  // namespace ocnerf
