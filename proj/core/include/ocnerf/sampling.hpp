// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ocnerf/camera.hpp"

namespace ocnerf {

/// Sample distances along one ray. Sample i stands for the interval
/// [t_i, t_i + delta_i); the last interval ends at `far`.
struct SampleSet {
  double near = 0.0;
  double far = 1.0;
  std::vector<double> t;
  std::vector<double> delta;
  std::vector<Vec3> x;
  std::vector<std::uint8_t> keep;

  std::size_t size() const { return t.size(); }
  std::size_t kept() const;

  /// Builds delta, x and keep (all true) from ascending distances.
  static SampleSet from_distances(const Ray& ray, std::vector<double> t);
  /// Throws InputError unless t is strictly ascending inside [near, far] and delta > 0.
  void validate() const;
};

/// N samples on [near, far]: one uniform draw per equal bin when `jitter`,
/// bin midpoints otherwise. Throws InputError for n == 0.
SampleSet stratified_sample(const Ray& ray, int n, bool jitter, std::uint64_t seed);

/// Inverse-CDF draws from the piecewise-constant density proportional to
/// weights + floor over the bins of `base` (edges at near, midpoints between
/// neighbouring t, far), merged with `base` and sorted. All-zero mass falls
/// back to a uniform density.
SampleSet importance_resample(const Ray& ray, const SampleSet& base, std::span<const double> weights,
                              int n_importance, std::uint64_t seed, double floor = 1e-3);

/// Bin edges used by importance_resample; size base.size() + 1.
std::vector<double> sample_bin_edges(const SampleSet& base);

}  // namespace ocnerf
