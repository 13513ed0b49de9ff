// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "ocnerf/sampling.hpp"

namespace ocnerf {

template <class T>
using Rgb = Eigen::Matrix<T, 3, 1>;
template <class T>
using RgbBlock = Eigen::Matrix<T, 3, Eigen::Dynamic>;

/// Guard on the opacity normaliser of the expected depth.
inline constexpr double kDepthEpsilon = 1e-6;

template <class T>
struct RenderResult {
  Rgb<T> color = Rgb<T>::Zero();
  T opacity = T(0);
  /// Weight-normalised expected depth, sum(w t) / max(opacity, eps).
  T depth = T(0);
  /// Expected termination distance with the far plane absorbing the
  /// remaining transmittance: sum(w t) + (1 - opacity) * far.
  T terminal_depth = T(0);
  std::vector<T> weights;
};

/// Quadrature compositing along one ray.
///   alpha_i = 1 - exp(-sigma_i delta_i),  T_i = exp(-sum_{j<i} sigma_j delta_j)
///   color = sum T_i alpha_i c_i + (1 - opacity) * background,  opacity = sum T_i alpha_i
/// Samples with keep == 0 are treated as sigma = 0.
/// Throws InputError on negative sigma or mismatched lengths.
template <class T>
RenderResult<T> composite(const SampleSet& samples, std::span<const T> sigma, const RgbBlock<T>& color,
                          const Rgb<T>& background);

template <class T>
struct CompositeGradient {
  std::vector<T> dsigma;
  RgbBlock<T> dcolor;
};

/// Upstream gradients of the scalar loss with respect to the composite outputs.
template <class T>
struct CompositeUpstream {
  Rgb<T> dcolor = Rgb<T>::Zero();
  T dopacity = T(0);
  T ddepth = T(0);
  T dterminal_depth = T(0);
};

/// Reverse-mode derivative of composite(). Pruned samples get exactly zero.
template <class T>
CompositeGradient<T> composite_backward(const SampleSet& samples, std::span<const T> sigma,
                                        const RgbBlock<T>& color, const Rgb<T>& background,
                                        const RenderResult<T>& result, const CompositeUpstream<T>& upstream);

}  // namespace ocnerf
