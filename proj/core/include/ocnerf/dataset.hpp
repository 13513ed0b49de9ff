// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "ocnerf/camera.hpp"
#include "ocnerf/synthetic.hpp"

namespace ocnerf {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major RGB

  Vec3 color(int row, int col) const {
    const std::size_t i = 3 * (static_cast<std::size_t>(row) * width + col);
    return Vec3(data[i], data[i + 1], data[i + 2]) / 255.0;
  }
};

/// Per-pixel instance ids; 0 is unlabeled/background.
struct InstanceMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;

  int at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
  int max_id() const;
};

struct Dataset {
  std::vector<CameraPose> poses;
  std::vector<RgbImage> images;
  std::vector<InstanceMask> masks;
  std::optional<std::vector<std::vector<float>>> depths;
  std::optional<SyntheticScene> scene;

  std::size_t size() const { return poses.size(); }
  /// K, the largest instance id over all masks.
  int object_count() const;
  /// Throws ValidationError when counts or resolutions disagree or poses are invalid.
  void validate() const;
  /// Scene box from scene.json when present, else [-1, 1]^3.
  RayBounds ray_bounds() const;
};

/// Reads the directory layout written by save_dataset(). Missing or
/// ill-formed files raise LoadError naming the file; shape mismatches raise
/// ValidationError.
Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Four-digit zero-padded view file stem.
std::string view_stem(std::size_t index);

// JSON helpers shared with the CLI.
std::string poses_to_json(const std::vector<CameraPose>& poses);
std::vector<CameraPose> poses_from_json(const std::string& text, const std::string& source_name);
std::string scene_to_json(const SyntheticScene& scene);
SyntheticScene scene_from_json(const std::string& text, const std::string& source_name);
std::vector<CameraPose> load_poses(const std::filesystem::path& file);
SyntheticScene load_scene(const std::filesystem::path& file);

}  // namespace ocnerf
