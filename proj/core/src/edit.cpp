// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/edit.hpp"

#include <algorithm>
#include <tuple>

#include "json_util.hpp"
#include "ocnerf/parallel.hpp"

namespace ocnerf {

using namespace detail;

void EditScript::validate(int object_count) const {
  for (const Edit& e : edits) {
    if (e.object < 1 || e.object > object_count)
      throw InputError("edit references object " + std::to_string(e.object) + " outside 1.." +
                       std::to_string(object_count));
    e.transform.validate();
  }
  for (const RemovalBox& b : removal_boxes) {
    if (b.object < 1 || b.object > object_count)
      throw InputError("removal box references object " + std::to_string(b.object));
    if (!(b.box.max.array() >= b.box.min.array()).all()) throw InputError("removal box has min > max");
  }
}

namespace {

EditMode parse_mode(const std::string& s) {
  if (s == "move") return EditMode::move;
  if (s == "duplicate") return EditMode::duplicate;
  if (s == "remove") return EditMode::remove;
  throw std::runtime_error("unknown edit mode '" + s + "'");
}

const char* mode_name(EditMode m) {
  switch (m) {
    case EditMode::move: return "move";
    case EditMode::duplicate: return "duplicate";
    case EditMode::remove: return "remove";
  }
  return "?";
}

}  // namespace

EditScript parse_edit_script(const std::string& text, const std::string& source) {
  EditScript s;
  try {
    const json j = json::parse(text);
    if (j.contains("edits"))
      for (const auto& e : j.at("edits")) {
        Edit edit;
        edit.object = e.at("object").get<int>();
        edit.mode = parse_mode(e.value("mode", std::string("move")));
        if (e.contains("R")) edit.transform.rotation = json_mat(e.at("R"));
        if (e.contains("t")) edit.transform.translation = json_vec(e.at("t"));
        s.edits.push_back(edit);
      }
    if (j.contains("removal_boxes"))
      for (const auto& b : j.at("removal_boxes"))
        s.removal_boxes.push_back(RemovalBox{b.at("object").get<int>(), json_box(b)});
  } catch (const std::exception& e) {
    throw LoadError(source, e.what());
  }
  for (const Edit& e : s.edits)
    if (!is_rotation(e.transform.rotation)) throw InputError(source + ": edit rotation is not orthonormal");
  return s;
}

EditScript load_edit_script(const std::filesystem::path& path) {
  return parse_edit_script(read_text(path), path.string());
}

std::string edit_script_to_json(const EditScript& script) {
  json edits = json::array();
  for (const Edit& e : script.edits)
    edits.push_back({{"object", e.object},
                     {"mode", mode_name(e.mode)},
                     {"R", mat_json(e.transform.rotation)},
                     {"t", vec_json(e.transform.translation)}});
  json boxes = json::array();
  for (const RemovalBox& b : script.removal_boxes) {
    json jb = box_json(b.box);
    jb["object"] = b.object;
    boxes.push_back(jb);
  }
  return json{{"edits", edits}, {"removal_boxes", boxes}}.dump(2);
}

Aabb default_removal_box(const Aabb& object_box) { return object_box.padded(0.05); }

std::vector<Aabb> removal_regions(const EditScript& script, std::span<const std::optional<Aabb>> object_bounds) {
  std::vector<Aabb> regions;
  for (const RemovalBox& b : script.removal_boxes) regions.push_back(b.box);
  std::vector<int> done;
  for (const Edit& e : script.edits) {
    if (e.mode == EditMode::duplicate) continue;
    if (std::find(done.begin(), done.end(), e.object) != done.end()) continue;
    done.push_back(e.object);
    const bool explicit_box = std::any_of(script.removal_boxes.begin(), script.removal_boxes.end(),
                                          [&](const RemovalBox& b) { return b.object == e.object; });
    if (explicit_box) continue;
    const auto k = static_cast<std::size_t>(e.object - 1);
    if (k >= object_bounds.size() || !object_bounds[k])
      throw InputError("object " + std::to_string(e.object) + " has no known bounds; give a removal box");
    regions.push_back(default_removal_box(*object_bounds[k]));
  }
  return regions;
}

namespace {

bool in_any(std::span<const Aabb> regions, const Vec3& x) {
  return std::any_of(regions.begin(), regions.end(), [&](const Aabb& b) { return b.contains(x); });
}

SourceStream to_stream(int source, const SampleSet& samples, const FieldValues<float>& v,
                       const std::vector<std::uint8_t>& active) {
  SourceStream s;
  s.source = source;
  s.t = samples.t;
  s.sigma.assign(samples.size(), 0.0);
  s.color.assign(samples.size(), Vec3::Zero());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!active[i]) continue;
    s.sigma[i] = v.sigma[i];
    s.color[i] = v.color.col(static_cast<Eigen::Index>(i)).cast<double>();
  }
  return s;
}

}  // namespace

SourceStream background_stage(const FieldNetwork<float>& net, const Ray& ray, const SampleSet& samples,
                              std::span<const Aabb> regions) {
  const std::vector<Vec3> d(samples.size(), ray.direction);
  const FieldValues<float> v = evaluate_branch<float>(net, BranchKind::scene, 0, samples.x, d);
  std::vector<std::uint8_t> active(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) active[i] = in_any(regions, samples.x[i]) ? 0 : 1;
  return to_stream(0, samples, v, active);
}

SourceStream object_stage(const FieldNetwork<float>& net, const Ray& ray, const SampleSet& samples, int k,
                          const RigidTransform& transform, const std::optional<Aabb>& support) {
  transform.validate();
  const RigidTransform inv = transform.inverse();
  std::vector<Vec3> x(samples.size());
  std::vector<std::uint8_t> active(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    x[i] = inv.apply(samples.x[i]);
    active[i] = !support || support->contains(x[i]) ? 1 : 0;
  }
  const std::vector<Vec3> d(samples.size(), inv.apply_direction(ray.direction));
  const FieldValues<float> v = evaluate_branch<float>(net, BranchKind::object, k, x, d);
  return to_stream(k, samples, v, active);
}

std::vector<ComposedSample> merge_streams(std::span<const SourceStream> streams) {
  std::vector<ComposedSample> out;
  for (const SourceStream& s : streams) {
    if (s.sigma.size() != s.t.size() || s.color.size() != s.t.size())
      throw InputError("source stream arrays differ in length");
    for (std::size_t i = 0; i < s.t.size(); ++i) out.push_back(ComposedSample{s.t[i], s.sigma[i], s.color[i], s.source});
  }
  std::sort(out.begin(), out.end(), [](const ComposedSample& a, const ComposedSample& b) {
    return std::tie(a.t, a.source, a.sigma, a.color.x(), a.color.y(), a.color.z()) <
           std::tie(b.t, b.source, b.sigma, b.color.x(), b.color.y(), b.color.z());
  });
  return out;
}

RenderResult<double> compose(const Ray& ray, std::span<const SourceStream> streams, const Vec3& background) {
  const std::vector<ComposedSample> merged = merge_streams(streams);
  const std::size_t n = merged.size();
  SampleSet s;
  s.near = ray.near;
  s.far = ray.far;
  s.t.resize(n);
  s.delta.resize(n);
  s.x.resize(n);
  s.keep.assign(n, 1);
  std::vector<double> sigma(n);
  RgbBlock<double> color(3, static_cast<Eigen::Index>(n));
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = merged[i].t;
    if (next <= i) {
      next = i + 1;
      while (next < n && !(merged[next].t > t)) ++next;
    }
    s.t[i] = t;
    s.delta[i] = std::max(0.0, (next < n ? merged[next].t : ray.far) - t);
    s.x[i] = ray.at(t);
    sigma[i] = merged[i].sigma;
    color.col(static_cast<Eigen::Index>(i)) = merged[i].color;
  }
  return composite<double>(s, sigma, color, background);
}

EditedImage render_view(const FieldNetwork<float>& net, std::span<const std::optional<Aabb>> object_bounds,
                        const CameraPose& pose, const EditScript& script, const RenderConfig& cfg) {
  pose.validate();
  script.validate(net.config().object_count);
  const std::vector<Aabb> regions = removal_regions(script, object_bounds);
  std::vector<const Edit*> drawn;
  for (const Edit& e : script.edits)
    if (e.mode != EditMode::remove) drawn.push_back(&e);
  std::vector<RigidTransform> inverse;
  std::vector<std::optional<Aabb>> support;
  for (const Edit* e : drawn) {
    inverse.push_back(e->transform.inverse());
    const auto k = static_cast<std::size_t>(e->object - 1);
    support.push_back(k < object_bounds.size() && object_bounds[k]
                          ? std::optional<Aabb>(default_removal_box(*object_bounds[k]))
                          : std::nullopt);
  }

  const std::vector<Ray> rays = view_rays(pose, cfg.ray_bounds);
  EditedImage img;
  img.width = pose.intrinsics.width;
  img.height = pose.intrinsics.height;
  img.rgb.resize(3 * rays.size());
  img.opacity.resize(rays.size());
  img.depth.resize(rays.size());

  const std::size_t chunk = static_cast<std::size_t>(std::max(1, cfg.chunk_rays));
  const std::size_t chunks = (rays.size() + chunk - 1) / chunk;
  parallel_for(chunks, cfg.workers, [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(rays.size(), begin + chunk);
    std::vector<SampleSet> sets;
    std::vector<Vec3> x;
    std::vector<Vec3> d;
    for (std::size_t r = begin; r < end; ++r) {
      sets.push_back(ray_samples(rays[r], cfg));
      x.insert(x.end(), sets.back().x.begin(), sets.back().x.end());
      d.insert(d.end(), sets.back().size(), rays[r].direction);
    }
    const FieldValues<float> scene = evaluate_branch<float>(net, BranchKind::scene, 0, x, d);
    std::vector<FieldValues<float>> objects;
    std::vector<std::vector<std::uint8_t>> active(drawn.size(), std::vector<std::uint8_t>(x.size()));
    for (std::size_t e = 0; e < drawn.size(); ++e) {
      std::vector<Vec3> xo(x.size());
      std::vector<Vec3> dobj(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        xo[i] = inverse[e].apply(x[i]);
        dobj[i] = inverse[e].apply_direction(d[i]);
        active[e][i] = !support[e] || support[e]->contains(xo[i]) ? 1 : 0;
      }
      objects.push_back(evaluate_branch<float>(net, BranchKind::object, drawn[e]->object, xo, dobj));
    }

    std::size_t offset = 0;
    for (std::size_t r = begin; r < end; ++r) {
      const SampleSet& s = sets[r - begin];
      std::vector<SourceStream> streams;
      SourceStream scn{0, s.t, std::vector<double>(s.size(), 0.0), std::vector<Vec3>(s.size(), Vec3::Zero())};
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (in_any(regions, s.x[i])) continue;
        scn.sigma[i] = scene.sigma[offset + i];
        scn.color[i] = scene.color.col(static_cast<Eigen::Index>(offset + i)).cast<double>();
      }
      streams.push_back(std::move(scn));
      for (std::size_t e = 0; e < drawn.size(); ++e) {
        SourceStream obj{drawn[e]->object, {}, {}, {}};
        for (std::size_t i = 0; i < s.size(); ++i) {
          if (!active[e][offset + i]) continue;
          obj.t.push_back(s.t[i]);
          obj.sigma.push_back(objects[e].sigma[offset + i]);
          obj.color.push_back(objects[e].color.col(static_cast<Eigen::Index>(offset + i)).cast<double>());
        }
        if (!obj.t.empty()) streams.push_back(std::move(obj));
      }
      const RenderResult<double> res = compose(rays[r], streams, cfg.background);
      for (int ch = 0; ch < 3; ++ch) img.rgb[3 * r + static_cast<std::size_t>(ch)] = res.color[ch];
      img.opacity[r] = res.opacity;
      img.depth[r] = res.terminal_depth;
      offset += s.size();
    }
  });
  return img;
}

}  // namespace ocnerf
