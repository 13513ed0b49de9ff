// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "ocnerf/errors.hpp"
#include "ocnerf/geometry.hpp"

namespace ocnerf::detail {

using json = nlohmann::json;

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), "cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw LoadError(path.string(), "write failed");
}

inline json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 json_vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected an array of 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline json mat_json(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

inline Mat3 json_mat(const json& j) {
  if (!j.is_array() || j.size() != 9) throw std::runtime_error("expected an array of 9 numbers");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j[static_cast<std::size_t>(3 * r + c)].get<double>();
  return m;
}

inline json box_json(const Aabb& b) { return {{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}; }
inline Aabb json_box(const json& j) { return Aabb{json_vec(j.at("min")), json_vec(j.at("max"))}; }

}  // namespace ocnerf::detail
