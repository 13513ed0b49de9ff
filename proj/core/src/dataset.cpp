// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ocnerf/errors.hpp"
#include "ocnerf/image_io.hpp"
#include "json_util.hpp"

namespace ocnerf {

namespace fs = std::filesystem;

using namespace detail;

int InstanceMask::max_id() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

int Dataset::object_count() const {
  int k = 0;
  for (const auto& m : masks) k = std::max(k, m.max_id());
  return k;
}

void Dataset::validate() const {
  if (images.size() != poses.size() || masks.size() != poses.size())
    throw ValidationError("dataset has mismatched pose/image/mask counts");
  if (depths && depths->size() != poses.size()) throw ValidationError("dataset depth count mismatch");
  for (std::size_t i = 0; i < poses.size(); ++i) {
    try {
      poses[i].validate();
    } catch (const InputError& e) {
      throw ValidationError("view " + view_stem(i) + ": " + e.what());
    }
    const auto& k = poses[i].intrinsics;
    const auto& img = images[i];
    const auto& m = masks[i];
    if (img.width != k.width || img.height != k.height)
      throw ValidationError("view " + view_stem(i) + ": image size does not match intrinsics");
    if (m.width != img.width || m.height != img.height)
      throw ValidationError("view " + view_stem(i) + ": mask resolution does not match image");
    if (img.data.size() != 3u * img.width * img.height || m.labels.size() != 1u * m.width * m.height)
      throw ValidationError("view " + view_stem(i) + ": pixel buffer size mismatch");
    if (depths && (*depths)[i].size() != m.labels.size())
      throw ValidationError("view " + view_stem(i) + ": depth map size mismatch");
  }
}

RayBounds Dataset::ray_bounds() const {
  RayBounds rb;
  if (scene) rb.bounds = scene->bounds;
  return rb;
}

std::string view_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return buf;
}

std::string poses_to_json(const std::vector<CameraPose>& poses) {
  json arr = json::array();
  for (const auto& p : poses) {
    arr.push_back({{"R", mat_json(p.rotation)},
                   {"t", vec_json(p.translation)},
                   {"focal", p.intrinsics.focal},
                   {"cx", p.intrinsics.cx},
                   {"cy", p.intrinsics.cy},
                   {"width", p.intrinsics.width},
                   {"height", p.intrinsics.height}});
  }
  return arr.dump(1);
}

std::vector<CameraPose> poses_from_json(const std::string& text, const std::string& source) {
  std::vector<CameraPose> poses;
  try {
    const json arr = json::parse(text);
    if (!arr.is_array()) throw std::runtime_error("expected a JSON array");
    for (const auto& j : arr) {
      CameraPose p;
      p.rotation = json_mat(j.at("R"));
      p.translation = json_vec(j.at("t"));
      p.intrinsics.focal = j.at("focal").get<double>();
      p.intrinsics.cx = j.at("cx").get<double>();
      p.intrinsics.cy = j.at("cy").get<double>();
      p.intrinsics.width = j.at("width").get<int>();
      p.intrinsics.height = j.at("height").get<int>();
      poses.push_back(p);
    }
  } catch (const std::exception& e) {
    throw LoadError(source, std::string("ill-formed poses: ") + e.what());
  }
  return poses;
}

std::vector<CameraPose> load_poses(const fs::path& file) {
  return poses_from_json(read_text(file), file.string());
}

SyntheticScene load_scene(const fs::path& file) { return scene_from_json(read_text(file), file.string()); }

std::string scene_to_json(const SyntheticScene& scene) {
  json prims = json::array();
  for (const auto& p : scene.primitives) {
    prims.push_back({{"shape", p.shape == Shape::box ? "box" : "sphere"},
                     {"R", mat_json(p.pose.rotation)},
                     {"t", vec_json(p.pose.translation)},
                     {"size", vec_json(p.size)},
                     {"density", p.density},
                     {"albedo", vec_json(p.albedo)},
                     {"instance_id", p.instance_id}});
  }
  json j = {{"background", vec_json(scene.background)},
            {"bounds", {{"min", vec_json(scene.bounds.min)}, {"max", vec_json(scene.bounds.max)}}},
            {"primitives", prims}};
  return j.dump(1);
}

SyntheticScene scene_from_json(const std::string& text, const std::string& source) {
  SyntheticScene s;
  try {
    const json j = json::parse(text);
    s.background = json_vec(j.at("background"));
    s.bounds.min = json_vec(j.at("bounds").at("min"));
    s.bounds.max = json_vec(j.at("bounds").at("max"));
    for (const auto& pj : j.at("primitives")) {
      Primitive p;
      const std::string shape = pj.at("shape").get<std::string>();
      if (shape == "box") {
        p.shape = Shape::box;
      } else if (shape == "sphere") {
        p.shape = Shape::sphere;
      } else {
        throw std::runtime_error("unknown shape '" + shape + "'");
      }
      p.pose.rotation = pj.contains("R") ? json_mat(pj.at("R")) : Mat3::Identity();
      p.pose.translation = json_vec(pj.at("t"));
      p.size = json_vec(pj.at("size"));
      p.density = pj.at("density").get<double>();
      p.albedo = json_vec(pj.at("albedo"));
      p.instance_id = pj.at("instance_id").get<int>();
      s.primitives.push_back(p);
    }
  } catch (const std::exception& e) {
    throw LoadError(source, std::string("ill-formed scene: ") + e.what());
  }
  return s;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir / "rgb");
  fs::create_directories(dir / "mask");
  write_text(dir / "poses.json", poses_to_json(ds.poses));
  if (ds.scene) write_text(dir / "scene.json", scene_to_json(*ds.scene));
  if (ds.depths) fs::create_directories(dir / "depth");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::string stem = view_stem(i);
    write_png(dir / "rgb" / (stem + ".png"), PngImage{ds.images[i].width, ds.images[i].height, 3, ds.images[i].data});
    write_png(dir / "mask" / (stem + ".png"), PngImage{ds.masks[i].width, ds.masks[i].height, 1, ds.masks[i].labels});
    if (ds.depths) write_f32(dir / "depth" / (stem + ".f32"), (*ds.depths)[i]);
  }
}

Dataset load_dataset(const fs::path& dir) {
  Dataset ds;
  const fs::path poses_file = dir / "poses.json";
  if (!fs::exists(poses_file)) throw LoadError(poses_file.string(), "missing poses file");
  ds.poses = load_poses(poses_file);
  const fs::path scene_file = dir / "scene.json";
  if (fs::exists(scene_file)) {
    ds.scene = scene_from_json(read_text(scene_file), scene_file.string());
    try {
      ds.scene->validate();
    } catch (const InputError& e) {
      throw ValidationError(scene_file.string() + ": " + e.what());
    }
  }
  const bool has_depth = fs::exists(dir / "depth");
  if (has_depth) ds.depths.emplace();
  for (std::size_t i = 0; i < ds.poses.size(); ++i) {
    const std::string stem = view_stem(i);
    const fs::path rgb_file = dir / "rgb" / (stem + ".png");
    const fs::path mask_file = dir / "mask" / (stem + ".png");
    PngImage rgb = read_png(rgb_file);
    if (rgb.channels != 3) throw LoadError(rgb_file.string(), "expected an RGB image");
    PngImage mask = read_png(mask_file);
    if (mask.channels != 1) throw LoadError(mask_file.string(), "expected a single-channel mask");
    ds.images.push_back(RgbImage{rgb.width, rgb.height, std::move(rgb.data)});
    ds.masks.push_back(InstanceMask{mask.width, mask.height, std::move(mask.data)});
    if (has_depth) {
      const fs::path depth_file = dir / "depth" / (stem + ".f32");
      ds.depths->push_back(read_f32(depth_file));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace ocnerf
