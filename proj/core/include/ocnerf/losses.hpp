// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ocnerf/composite.hpp"

namespace ocnerf {

struct LossConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  /// Off: w(r) = 1 for every ray.
  bool balanced = true;
  /// Weight of the optional scene depth term; 0 disables it.
  double lambda_depth = 0.0;

  /// Throws ConfigError on negative weights.
  void validate() const;
};

/// Supervision for a batch of rays.
struct RayTargets {
  std::vector<Vec3> color;
  std::vector<int> object;          // target k per ray
  std::vector<std::uint8_t> mask;   // M(r)^k
  std::vector<double> weight;       // w(r)^k
  std::vector<double> depth;        // NaN where unknown

  std::size_t size() const { return color.size(); }
  /// Throws InputError when the arrays disagree in length.
  void validate() const;
};

/// Per-object balanced weights: within the rays targeting k, mask-1 rays get
/// n0 / (n0 + n1) and mask-0 rays n1 / (n0 + n1). A group that is all ones
/// or all zeros gets 1.
std::vector<double> balanced_weight(std::span<const int> object, std::span<const std::uint8_t> mask);

/// L_obj = sum_r lambda1 M ||C_obj - C||^2 + lambda2 w ||O_obj - M||^2.
/// When `grad` is given it receives d(L_obj)/d(render outputs) per ray.
template <class T>
double object_loss(const RayTargets& targets, std::span<const RenderResult<T>> renders, const LossConfig& cfg,
                   std::vector<CompositeUpstream<T>>* grad = nullptr);

/// L_scn = sum_r ||C_scn - C||^2 (+ lambda_depth (D - D_gt)^2 on rays with a
/// known depth).
template <class T>
double scene_loss(const RayTargets& targets, std::span<const RenderResult<T>> renders, const LossConfig& cfg,
                  std::vector<CompositeUpstream<T>>* grad = nullptr);

/// L = L_obj + L_scn.
template <class T>
double total_loss(const RayTargets& targets, std::span<const RenderResult<T>> scene,
                  std::span<const RenderResult<T>> object, const LossConfig& cfg);

}  // namespace ocnerf
