// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ocnerf {

struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  std::vector<std::uint8_t> data;  // row-major, interleaved
};

/// 8-bit PNG; channels must be 1 (gray) or 3 (RGB). Throws LoadError on I/O failure.
void write_png(const std::filesystem::path& path, const PngImage& image);
/// Reads an 8-bit gray or RGB PNG without any colour conversion.
PngImage read_png(const std::filesystem::path& path);

/// Raw little-endian float32 array.
void write_f32(const std::filesystem::path& path, std::span<const float> values);
std::vector<float> read_f32(const std::filesystem::path& path);

/// Quantises [0, 1] floats to bytes (round to nearest, clamped).
std::uint8_t to_byte(double v);

}  // namespace ocnerf
