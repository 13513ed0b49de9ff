// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Core>

namespace ocnerf {

/// Mean squared error over all entries. Throws InputError on a size mismatch or empty input.
double mse(std::span<const double> a, std::span<const double> b);
/// 10 log10(1 / mse) for values in [0, 1]; +inf for identical inputs.
double psnr(std::span<const double> a, std::span<const double> b);
/// |A and B| / |A or B| over two binary masks; 1 when both are empty.
double iou(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
/// Weighted Jaccard of a soft opacity map against a binary mask:
/// sum min(o, m) / sum max(o, m); 1 when both are empty.
double soft_iou(std::span<const double> opacity, std::span<const std::uint8_t> mask);
/// Opacity-weighted mean pixel position (col + 0.5, row + 0.5); nullopt when all zero.
std::optional<Eigen::Vector2d> opacity_centroid(std::span<const double> opacity, int width, int height);

}  // namespace ocnerf
