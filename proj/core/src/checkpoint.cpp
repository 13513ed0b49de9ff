// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "json_util.hpp"

namespace ocnerf {

using namespace detail;

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'O', 'C', 'N', 'F'};
constexpr std::uint32_t kVersion = 1;

json encoding_json(const EncodingConfig& e) { return {{"frequencies", e.frequencies}, {"identity", e.include_identity}}; }

EncodingConfig json_encoding(const json& j) {
  EncodingConfig e;
  e.frequencies = j.at("frequencies").get<int>();
  e.include_identity = j.at("identity").get<bool>();
  return e;
}

json config_json(const NetworkConfig& c) {
  return {{"xyz", encoding_json(c.embedding.xyz)},
          {"dir", encoding_json(c.embedding.dir)},
          {"feature", encoding_json(c.embedding.feature)},
          {"bounds", box_json(c.bounds)},
          {"grid_resolution", c.grid_resolution},
          {"scene_feature_dim", c.scene_feature_dim},
          {"object_feature_dim", c.object_feature_dim},
          {"scene_depth", c.scene_depth},
          {"scene_width", c.scene_width},
          {"object_depth", c.object_depth},
          {"object_width", c.object_width},
          {"color_width", c.color_width},
          {"code_dim", c.code_dim},
          {"object_count", c.object_count},
          {"grid_init_scale", c.grid_init_scale},
          {"code_init_scale", c.code_init_scale},
          {"density_bias_init", c.density_bias_init}};
}

NetworkConfig json_config(const json& j) {
  NetworkConfig c;
  c.embedding.xyz = json_encoding(j.at("xyz"));
  c.embedding.dir = json_encoding(j.at("dir"));
  c.embedding.feature = json_encoding(j.at("feature"));
  c.bounds = json_box(j.at("bounds"));
  c.grid_resolution = j.at("grid_resolution").get<int>();
  c.scene_feature_dim = j.at("scene_feature_dim").get<int>();
  c.object_feature_dim = j.at("object_feature_dim").get<int>();
  c.scene_depth = j.at("scene_depth").get<int>();
  c.scene_width = j.at("scene_width").get<int>();
  c.object_depth = j.at("object_depth").get<int>();
  c.object_width = j.at("object_width").get<int>();
  c.color_width = j.at("color_width").get<int>();
  c.code_dim = j.at("code_dim").get<int>();
  c.object_count = j.at("object_count").get<int>();
  c.grid_init_scale = j.at("grid_init_scale").get<double>();
  c.code_init_scale = j.at("code_init_scale").get<double>();
  c.density_bias_init = j.at("density_bias_init").get<double>();
  return c;
}

template <class V>
void put(std::ofstream& out, const V& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <class V>
V get(std::ifstream& in, const std::string& file) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (!in) throw LoadError(file, "truncated checkpoint");
  return v;
}

}  // namespace

std::string network_config_to_json(const NetworkConfig& cfg) { return config_json(cfg).dump(2); }

NetworkConfig network_config_from_json(const std::string& text) { return json_config(json::parse(text)); }

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const VoxelGrid<float>& grid = ckpt.network.grid();
  json bounds = json::array();
  for (const auto& b : ckpt.object_bounds) bounds.push_back(b ? box_json(*b) : json(nullptr));
  const json header = {
      {"network", config_json(ckpt.network.config())},
      {"grid",
       {{"dims", grid.dims()},
        {"origin", vec_json(grid.origin())},
        {"cell_size", grid.cell_size()},
        {"scene_dim", grid.feature_dim(FeatureGroup::scene)},
        {"object_dim", grid.feature_dim(FeatureGroup::object)}}},
      {"background", vec_json(ckpt.background)},
      {"ray_bounds",
       {{"box", box_json(ckpt.ray_bounds.bounds)},
        {"padding", ckpt.ray_bounds.padding},
        {"default_near", ckpt.ray_bounds.default_near},
        {"default_far", ckpt.ray_bounds.default_far}}},
      {"object_bounds", bounds},
      {"step", ckpt.step}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(path.string(), "cannot open for writing");
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  FieldNetwork<float> net = ckpt.network;
  std::uint32_t count = 0;
  net.visit_parameters([&](const std::string&, std::span<float>, const auto&) { ++count; });
  put(out, count);
  net.visit_parameters([&](const std::string& name, std::span<float> v, const std::vector<std::int64_t>& shape) {
    put(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put(out, static_cast<std::uint32_t>(shape.size()));
    for (std::int64_t s : shape) put(out, s);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
  });
  if (!out) throw LoadError(path.string(), "write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(file, "cannot open");
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw LoadError(file, "not a checkpoint (bad magic)");
  const auto version = get<std::uint32_t>(in, file);
  if (version != kVersion) throw LoadError(file, "unsupported checkpoint version " + std::to_string(version));
  const auto header_size = get<std::uint64_t>(in, file);
  if (header_size > (1u << 24)) throw LoadError(file, "implausible header size");
  std::string text(header_size, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw LoadError(file, "truncated header");

  Checkpoint ckpt;
  try {
    const json h = json::parse(text);
    ckpt.network = FieldNetwork<float>(json_config(h.at("network")));
    const auto& g = h.at("grid");
    const VoxelGrid<float>& grid = ckpt.network.grid();
    if (g.at("dims").get<std::array<int, 3>>() != grid.dims() || g.at("cell_size").get<double>() != grid.cell_size() ||
        json_vec(g.at("origin")) != grid.origin())
      throw LoadError(file, "grid header does not match the network config");
    ckpt.background = json_vec(h.at("background"));
    const auto& rb = h.at("ray_bounds");
    ckpt.ray_bounds.bounds = json_box(rb.at("box"));
    ckpt.ray_bounds.padding = rb.at("padding").get<double>();
    ckpt.ray_bounds.default_near = rb.at("default_near").get<double>();
    ckpt.ray_bounds.default_far = rb.at("default_far").get<double>();
    for (const auto& b : h.at("object_bounds"))
      ckpt.object_bounds.push_back(b.is_null() ? std::nullopt : std::optional<Aabb>(json_box(b)));
    ckpt.step = h.at("step").get<std::int64_t>();
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError(file, std::string("bad header: ") + e.what());
  }

  const auto count = get<std::uint32_t>(in, file);
  std::map<std::string, std::vector<float>> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_size = get<std::uint32_t>(in, file);
    if (name_size > 4096) throw LoadError(file, "implausible tensor name");
    std::string name(name_size, '\0');
    in.read(name.data(), name_size);
    const auto rank = get<std::uint32_t>(in, file);
    if (rank > 8) throw LoadError(file, "implausible tensor rank");
    std::int64_t numel = 1;
    for (std::uint32_t r = 0; r < rank; ++r) numel *= get<std::int64_t>(in, file);
    if (numel < 0 || numel > (std::int64_t{1} << 32)) throw LoadError(file, "implausible tensor size");
    std::vector<float> data(static_cast<std::size_t>(numel));
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!in) throw LoadError(file, "truncated tensor " + name);
    tensors.emplace(std::move(name), std::move(data));
  }
  ckpt.network.visit_parameters([&](const std::string& name, std::span<float> v, const auto&) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw LoadError(file, "missing tensor " + name);
    if (it->second.size() != v.size()) throw LoadError(file, "tensor " + name + " has the wrong size");
    std::copy(it->second.begin(), it->second.end(), v.begin());
  });
  ckpt.network.grid().validate();
  return ckpt;
}

}  // namespace ocnerf
