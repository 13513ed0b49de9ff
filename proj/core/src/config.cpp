// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/config.hpp"

#include <charconv>
#include <variant>

#include "json_util.hpp"

namespace ocnerf {

using namespace detail;

TrainConfig default_train_config() {
  TrainConfig c;
  c.network.grid_resolution = 24;
  c.network.scene_feature_dim = 8;
  c.network.object_feature_dim = 8;
  c.network.scene_depth = 2;
  c.network.scene_width = 64;
  c.network.object_depth = 2;
  c.network.object_width = 64;
  c.network.color_width = 32;
  c.network.code_dim = 16;
  c.network.density_bias_init = -3.0;
  c.step.samples = 48;
  c.step.guard.importance = 32;
  c.batch_rays = 256;
  c.iterations = 2000;
  c.adam.lr = 5e-3;
  c.adam.lr_final = 5e-4;
  c.adam.decay_steps = 2000;
  c.adam.grid_lr_scale = 4.0;
  c.log_every = 100;
  return c;
}

namespace {

using Field = std::variant<int*, double*, bool*, std::uint64_t*>;

std::vector<std::pair<std::string, Field>> fields(TrainConfig& c) {
  return {
      {"seed", &c.seed},
      {"iterations", &c.iterations},
      {"batch_rays", &c.batch_rays},
      {"log_every", &c.log_every},
      {"checkpoint_every", &c.checkpoint_every},
      {"holdout", &c.holdout},
      {"workers", &c.step.workers},
      {"samples", &c.step.samples},
      {"jitter", &c.step.jitter},
      {"chunk_rays", &c.step.chunk_rays},
      {"shards", &c.step.shards},
      {"importance", &c.step.guard.importance},
      {"epsilon", &c.step.guard.epsilon},
      {"guard", &c.step.guard.guard},
      {"scene_guidance", &c.step.guard.scene_guidance},
      {"weight_floor", &c.step.guard.weight_floor},
      {"lambda1", &c.step.loss.lambda1},
      {"lambda2", &c.step.loss.lambda2},
      {"balanced", &c.step.loss.balanced},
      {"lambda_depth", &c.step.loss.lambda_depth},
      {"lr", &c.adam.lr},
      {"lr_final", &c.adam.lr_final},
      {"lr_decay_steps", &c.adam.decay_steps},
      {"beta1", &c.adam.beta1},
      {"beta2", &c.adam.beta2},
      {"adam_epsilon", &c.adam.epsilon},
      {"grid_lr_scale", &c.adam.grid_lr_scale},
      {"xyz_freqs", &c.network.embedding.xyz.frequencies},
      {"dir_freqs", &c.network.embedding.dir.frequencies},
      {"feature_freqs", &c.network.embedding.feature.frequencies},
      {"grid_resolution", &c.network.grid_resolution},
      {"scene_feature_dim", &c.network.scene_feature_dim},
      {"object_feature_dim", &c.network.object_feature_dim},
      {"scene_depth", &c.network.scene_depth},
      {"scene_width", &c.network.scene_width},
      {"object_depth", &c.network.object_depth},
      {"object_width", &c.network.object_width},
      {"color_width", &c.network.color_width},
      {"code_dim", &c.network.code_dim},
      {"grid_init_scale", &c.network.grid_init_scale},
      {"code_init_scale", &c.network.code_init_scale},
      {"density_bias_init", &c.network.density_bias_init},
  };
}

Field find(TrainConfig& c, const std::string& key) {
  for (auto& [name, f] : fields(c))
    if (name == key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

template <class V>
V parse_number(const std::string& key, const std::string& text) {
  V v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value '" + text + "' for " + key);
  return v;
}

}  // namespace

void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value) {
  std::visit(
      [&](auto* p) {
        using V = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<V, bool>) {
          if (value == "true" || value == "1") *p = true;
          else if (value == "false" || value == "0") *p = false;
          else throw ConfigError("bad value '" + value + "' for " + key + " (expected true/false)");
        } else {
          *p = parse_number<V>(key, value);
        }
      },
      find(cfg, key));
}

void apply_override(TrainConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void apply_config_json(TrainConfig& cfg, const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw LoadError(source, e.what());
  }
  if (!j.is_object()) throw LoadError(source, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    std::visit(
        [&](auto* p) {
          using V = std::remove_pointer_t<decltype(p)>;
          try {
            *p = value.get<V>();
          } catch (const std::exception&) {
            throw ConfigError(source + ": bad value for " + key);
          }
        },
        find(cfg, key));
  }
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  TrainConfig cfg = default_train_config();
  apply_config_json(cfg, read_text(path), path.string());
  return cfg;
}

std::string train_config_to_json(const TrainConfig& cfg) {
  TrainConfig copy = cfg;
  json j = json::object();
  for (auto& [name, f] : fields(copy)) std::visit([&](auto* p) { j[name] = *p; }, f);
  return j.dump(2);
}

std::vector<std::string> train_config_keys() {
  TrainConfig c;
  std::vector<std::string> keys;
  for (auto& [name, f] : fields(c)) keys.push_back(name);
  return keys;
}

}  // namespace ocnerf
