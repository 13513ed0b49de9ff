// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ocnerf/errors.hpp"

namespace ocnerf {

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw InputError("mse: inputs must be non-empty and equal in size");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

double psnr(std::span<const double> a, std::span<const double> b) {
  const double m = mse(a, b);
  return m == 0.0 ? std::numeric_limits<double>::infinity() : -10.0 * std::log10(m);
}

double iou(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw InputError("iou: masks differ in size");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double soft_iou(std::span<const double> opacity, std::span<const std::uint8_t> mask) {
  if (opacity.size() != mask.size()) throw InputError("soft_iou: sizes differ");
  double inter = 0.0;
  double uni = 0.0;
  for (std::size_t i = 0; i < opacity.size(); ++i) {
    const double o = std::clamp(opacity[i], 0.0, 1.0);
    const double m = mask[i] ? 1.0 : 0.0;
    inter += std::min(o, m);
    uni += std::max(o, m);
  }
  return uni == 0.0 ? 1.0 : inter / uni;
}

std::optional<Eigen::Vector2d> opacity_centroid(std::span<const double> opacity, int width, int height) {
  if (opacity.size() != static_cast<std::size_t>(width) * height) throw InputError("opacity_centroid: size mismatch");
  double total = 0.0;
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (int row = 0; row < height; ++row)
    for (int col = 0; col < width; ++col) {
      const double o = opacity[static_cast<std::size_t>(row) * width + col];
      total += o;
      acc += o * Eigen::Vector2d(col + 0.5, row + 0.5);
    }
  if (total <= 0.0) return std::nullopt;
  return acc / total;
}

}  // namespace ocnerf
