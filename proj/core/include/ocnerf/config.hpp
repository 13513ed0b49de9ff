// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ocnerf/trainer.hpp"

namespace ocnerf {

/// Desk-scale defaults used by the CLI and the acceptance suite.
TrainConfig default_train_config();

/// Sets one flat key (e.g. "epsilon", "batch_rays") from its text form.
/// Throws ConfigError for an unknown key or a malformed value.
void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value);
/// "key=value" form of apply_setting.
void apply_override(TrainConfig& cfg, const std::string& assignment);
/// Applies every key of a flat JSON object.
void apply_config_json(TrainConfig& cfg, const std::string& text, const std::string& source_name = "config");
TrainConfig load_train_config(const std::filesystem::path& path);

std::string train_config_to_json(const TrainConfig& cfg);
std::vector<std::string> train_config_keys();

}  // namespace ocnerf
