// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ocnerf/checkpoint.hpp"
#include "ocnerf/dataset.hpp"
#include "ocnerf/optimizer.hpp"
#include "ocnerf/ray_step.hpp"

namespace ocnerf {

struct TrainConfig {
  /// bounds and object_count are taken from the dataset.
  NetworkConfig network;
  StepConfig step;
  AdamConfig adam;
  int iterations = 2000;
  int batch_rays = 1024;
  std::uint64_t seed = 0;
  int log_every = 100;
  /// 0 writes only the final checkpoint.
  int checkpoint_every = 0;
  /// Trailing views left out of training; the first of them is the
  /// validation view (view 0 when none are held out).
  int holdout = 0;

  void validate() const;
};

struct LogRecord {
  std::int64_t step = 0;
  double scene_loss = 0.0;
  double object_loss = 0.0;
  double pruned_fraction = 0.0;
  std::optional<double> psnr_val;

  /// One JSON line: {"step", "L_scn", "L_obj", "pruned_fraction", "psnr_val"}.
  std::string to_json() const;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<LogRecord> log;
};

/// Deterministic given config.seed. When out_dir is non-empty writes
/// train_log.jsonl, config.json and checkpoint.ocnf there. A non-finite loss
/// writes nan_dump.json (when out_dir is set) and throws NumericError.
TrainResult train(const Dataset& dataset, const TrainConfig& cfg, const std::filesystem::path& out_dir = {},
                  const std::function<void(const LogRecord&)>& on_log = {});

/// Network config with the dataset's scene box and object count filled in.
NetworkConfig network_config_for(const Dataset& dataset, NetworkConfig base);

/// Box around lattice points where object k's density exceeds `threshold`.
std::optional<Aabb> estimate_object_bounds(const FieldNetwork<float>& net, int k, int lattice = 48,
                                           double threshold = 5.0);

}  // namespace ocnerf
