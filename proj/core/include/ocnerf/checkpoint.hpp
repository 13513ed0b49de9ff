// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ocnerf/camera.hpp"
#include "ocnerf/field_network.hpp"

namespace ocnerf {

/// A trained model plus what is needed to render it.
struct Checkpoint {
  FieldNetwork<float> network;
  Vec3 background = Vec3::Zero();
  RayBounds ray_bounds;
  /// Training-time box of object k at index k - 1, when known.
  std::vector<std::optional<Aabb>> object_bounds;
  std::int64_t step = 0;
};

/// Layout: "OCNF", u32 version, u64 header size, JSON header (network config,
/// grid header, render settings), u32 tensor count, then per tensor: u32 name
/// size, name, u32 rank, i64 dims, little-endian float32 data.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws LoadError naming the file on a bad magic, version, header or tensor table.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string network_config_to_json(const NetworkConfig& cfg);
NetworkConfig network_config_from_json(const std::string& text);

}  // namespace ocnerf
