// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "ocnerf/composite.hpp"
#include "ocnerf/dataset.hpp"
#include "ocnerf/errors.hpp"
#include "ocnerf/image_io.hpp"
#include "ocnerf/parallel.hpp"

namespace ocnerf {

bool Primitive::contains(const Vec3& x) const {
  const Vec3 local = pose.rotation.transpose() * (x - pose.translation);
  if (shape == Shape::sphere) return local.squaredNorm() <= size.x() * size.x();
  return (local.array().abs() <= size.array()).all();
}

std::optional<std::pair<double, double>> Primitive::intersect(const Vec3& origin, const Vec3& dir) const {
  const Vec3 o = pose.rotation.transpose() * (origin - pose.translation);
  const Vec3 d = pose.rotation.transpose() * dir;
  if (shape == Shape::box) return Aabb{-size, size}.intersect(o, d);
  const double r = size.x();
  const double a = d.squaredNorm();
  const double b = o.dot(d);
  const double c = o.squaredNorm() - r * r;
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  return std::make_pair((-b - s) / a, (-b + s) / a);
}

Aabb Primitive::world_bounds() const {
  if (shape == Shape::sphere) {
    const Vec3 r = Vec3::Constant(size.x());
    return {pose.translation - r, pose.translation + r};
  }
  const Vec3 half = pose.rotation.cwiseAbs() * size;
  return {pose.translation - half, pose.translation + half};
}

void SyntheticScene::validate() const {
  if (!(bounds.max.array() > bounds.min.array()).all()) throw InputError("scene bounds are empty");
  for (const auto& p : primitives) {
    if (!(p.density >= 0.0) || !std::isfinite(p.density)) throw InputError("primitive density must be >= 0");
    if (p.instance_id < 1 || p.instance_id > 255) throw InputError("primitive instance id must be in 1..255");
    if (!(p.size.array() > 0.0).all()) throw InputError("primitive size must be positive");
    if ((p.albedo.array() < 0.0).any() || (p.albedo.array() > 1.0).any())
      throw InputError("primitive albedo must lie in [0, 1]");
    p.pose.validate();
    const Aabb b = p.world_bounds();
    if ((b.min.array() < bounds.min.array() - 1e-9).any() || (b.max.array() > bounds.max.array() + 1e-9).any())
      throw InputError("primitive extends outside the scene bounds");
  }
}

int SyntheticScene::object_count() const {
  int k = 0;
  for (const auto& p : primitives) k = std::max(k, p.instance_id);
  return k;
}

SyntheticScene SyntheticScene::only(int instance_id) const {
  SyntheticScene out = *this;
  std::erase_if(out.primitives, [&](const Primitive& p) { return p.instance_id != instance_id; });
  return out;
}

std::optional<Aabb> SyntheticScene::instance_bounds(int instance_id) const {
  std::optional<Aabb> box;
  for (const auto& p : primitives) {
    if (p.instance_id != instance_id) continue;
    const Aabb b = p.world_bounds();
    if (!box) {
      box = b;
    } else {
      box->min = box->min.cwiseMin(b.min);
      box->max = box->max.cwiseMax(b.max);
    }
  }
  return box;
}

FieldSample eval_analytic_field(const SyntheticScene& scene, const Vec3& x) {
  FieldSample out;
  Vec3 weighted = Vec3::Zero();
  for (const auto& p : scene.primitives) {
    if (p.density > 0.0 && p.contains(x)) {
      out.sigma += p.density;
      weighted += p.density * p.albedo;
    }
  }
  out.color = out.sigma > 0.0 ? Vec3(weighted / out.sigma) : scene.background;
  return out;
}

OraclePixel oracle_render_ray(const SyntheticScene& scene, const Ray& ray, int samples) {
  if (samples < 1) throw InputError("oracle needs at least one sample");
  const std::size_t n = static_cast<std::size_t>(samples);
  const double step = (ray.far - ray.near) / samples;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = ray.near + (static_cast<double>(i) + 0.5) * step;
  SampleSet set = SampleSet::from_distances(ray, std::move(t));
  set.delta.assign(n, step);

  // Optical depth of each bin from the exact overlap of the bin with every
  // primitive's chord, so primitive faces need not line up with bins.
  const int k_max = scene.object_count();
  std::vector<double> optical(n, 0.0);
  std::vector<Vec3> weighted(n, Vec3::Zero());
  std::vector<double> instance_optical(n * static_cast<std::size_t>(k_max + 1), 0.0);
  for (const auto& p : scene.primitives) {
    if (p.density <= 0.0) continue;
    const auto hit = p.intersect(ray.origin, ray.direction);
    if (!hit) continue;
    const double lo = std::max(hit->first, ray.near);
    const double hi = std::min(hit->second, ray.far);
    if (!(hi > lo)) continue;
    const auto first = static_cast<std::size_t>(std::clamp((lo - ray.near) / step, 0.0, double(n - 1)));
    const auto last = static_cast<std::size_t>(std::clamp((hi - ray.near) / step, 0.0, double(n - 1)));
    for (std::size_t i = first; i <= last; ++i) {
      const double a = ray.near + static_cast<double>(i) * step;
      const double overlap = std::min(hi, a + step) - std::max(lo, a);
      if (overlap <= 0.0) continue;
      const double tau = p.density * overlap;
      optical[i] += tau;
      weighted[i] += tau * p.albedo;
      instance_optical[i * (k_max + 1) + p.instance_id] += tau;
    }
  }
  std::vector<double> sigma(n);
  RgbBlock<double> color(3, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    sigma[i] = optical[i] / step;
    color.col(static_cast<Eigen::Index>(i)) = optical[i] > 0.0 ? Vec3(weighted[i] / optical[i]) : scene.background;
  }
  const auto result = composite<double>(set, sigma, color, scene.background);

  OraclePixel px;
  px.color = result.color;
  px.opacity = result.opacity;
  px.depth = result.terminal_depth;
  std::vector<double> share(static_cast<std::size_t>(k_max + 1), 0.0);
  for (std::size_t i = 0; i < n && px.instance == 0; ++i) {
    if (optical[i] <= 0.0) continue;
    for (int k = 1; k <= k_max; ++k) {
      const double s = instance_optical[i * (k_max + 1) + k];
      if (s <= 0.0) continue;
      share[k] += result.weights[i] * s / optical[i];
      if (share[k] > 0.5) {
        px.instance = k;
        break;
      }
    }
  }
  return px;
}

RayBounds scene_ray_bounds(const SyntheticScene& scene) {
  RayBounds rb;
  rb.bounds = scene.bounds;
  return rb;
}

OracleImage oracle_render_view(const SyntheticScene& scene, const CameraPose& pose, int samples,
                               const RayBounds& ray_bounds, int workers) {
  pose.validate();
  OracleImage img;
  img.width = pose.intrinsics.width;
  img.height = pose.intrinsics.height;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.rgb.resize(3 * n);
  img.opacity.resize(n);
  img.depth.resize(n);
  img.mask.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const Pixel px{static_cast<int>(i / img.width), static_cast<int>(i % img.width)};
    const OraclePixel o = oracle_render_ray(scene, camera_ray(pose, px, ray_bounds), samples);
    for (int c = 0; c < 3; ++c) img.rgb[3 * i + c] = o.color[c];
    img.opacity[i] = o.opacity;
    img.depth[i] = o.depth;
    img.mask[i] = static_cast<std::uint8_t>(o.instance);
  });
  return img;
}

void generate_synthetic_scene(const SyntheticScene& scene, std::span<const CameraPose> poses, int oracle_samples,
                              const std::filesystem::path& out_dir, int workers) {
  if (oracle_samples < 1024) throw InputError("oracle_samples must be >= 1024");
  scene.validate();
  for (const auto& p : poses) p.validate();

  Dataset ds;
  ds.scene = scene;
  ds.depths.emplace();
  const RayBounds rb = scene_ray_bounds(scene);
  for (const auto& pose : poses) {
    const OracleImage img = oracle_render_view(scene, pose, oracle_samples, rb, workers);
    RgbImage rgb{img.width, img.height, {}};
    rgb.data.resize(img.rgb.size());
    std::transform(img.rgb.begin(), img.rgb.end(), rgb.data.begin(), [](double v) { return to_byte(v); });
    ds.poses.push_back(pose);
    ds.images.push_back(std::move(rgb));
    ds.masks.push_back(InstanceMask{img.width, img.height, img.mask});
    ds.depths->emplace_back(img.depth.begin(), img.depth.end());
  }
  save_dataset(ds, out_dir);
}

std::vector<CameraPose> ring_poses(int count, double radius, double height, const Vec3& target,
                                   const Intrinsics& intrinsics, double start_angle, double arc) {
  std::vector<CameraPose> poses;
  const bool closed = std::abs(arc - 6.283185307179586) < 1e-9;
  for (int i = 0; i < count; ++i) {
    const double frac = closed ? double(i) / count : (count > 1 ? double(i) / (count - 1) : 0.0);
    const double a = start_angle + arc * frac;
    const Vec3 eye = target + Vec3(radius * std::cos(a), height, radius * std::sin(a));
    poses.push_back(look_at(eye, target, Vec3::UnitY(), intrinsics));
  }
  return poses;
}

namespace {

Primitive make_box(const Vec3& center, const Vec3& half, const Vec3& albedo, int id, double density = 50.0) {
  Primitive p;
  p.shape = Shape::box;
  p.pose = RigidTransform::translate(center);
  p.size = half;
  p.albedo = albedo;
  p.instance_id = id;
  p.density = density;
  return p;
}

Primitive make_sphere(const Vec3& center, double radius, const Vec3& albedo, int id, double density = 50.0) {
  Primitive p;
  p.shape = Shape::sphere;
  p.pose = RigidTransform::translate(center);
  p.size = Vec3::Constant(radius);
  p.albedo = albedo;
  p.instance_id = id;
  p.density = density;
  return p;
}

}  // namespace

std::vector<std::string> preset_names() { return {"empty", "one-sphere", "two-box-occlusion"}; }

SyntheticScene preset_scene(const std::string& name) {
  SyntheticScene s;
  s.bounds = Aabb{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
  s.background = Vec3::Zero();
  if (name == "empty") return s;
  if (name == "one-sphere") {
    s.primitives.push_back(make_sphere(Vec3::Zero(), 0.5, Vec3(0.9, 0.55, 0.2), 1));
    return s;
  }
  if (name == "two-box-occlusion") {
    // Object 1 sits behind the taller object 2 as seen from the +x side.
    s.primitives.push_back(make_box(Vec3(-0.35, -0.25, 0.0), Vec3(0.25, 0.25, 0.25), Vec3(0.2, 0.45, 0.9), 1));
    s.primitives.push_back(make_box(Vec3(0.35, -0.1, 0.0), Vec3(0.12, 0.45, 0.55), Vec3(0.9, 0.3, 0.25), 2));
    return s;
  }
  throw InputError("unknown preset scene '" + name + "'");
}

Intrinsics preset_intrinsics(int size) {
  if (size < 1) throw InputError("image size must be >= 1");
  return Intrinsics{1.8 * size, 0.5 * size, 0.5 * size, size, size};
}

std::vector<CameraPose> preset_rig(const std::string& name, int count, int size) {
  preset_scene(name);
  if (count < 1) throw InputError("view count must be >= 1");
  const Intrinsics intr = preset_intrinsics(size);
  constexpr double kTwoPi = 6.283185307179586;
  std::vector<double> angles;
  if (name == "two-box-occlusion") {
    // Most views look along -x, where object 2 hides object 1.
    const int front = static_cast<int>(std::lround(0.85 * count));
    const double half = 0.45;
    for (int i = 0; i < front; ++i) angles.push_back(front > 1 ? -half + 2.0 * half * i / (front - 1) : 0.0);
    const int rest = count - front;
    for (int i = 0; i < rest; ++i) angles.push_back(half + (kTwoPi - 2.0 * half) * (i + 1.0) / (rest + 1.0));
  } else {
    for (int i = 0; i < count; ++i) angles.push_back(kTwoPi * i / count);
  }
  std::vector<CameraPose> poses;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double height = i % 2 == 0 ? 0.5 : 1.3;
    const Vec3 eye(3.0 * std::cos(angles[i]), height, 3.0 * std::sin(angles[i]));
    poses.push_back(look_at(eye, Vec3::Zero(), Vec3::UnitY(), intr));
  }
  return poses;
}

std::vector<CameraPose> preset_holdout(const std::string& name, int size) {
  preset_scene(name);
  const Intrinsics intr = preset_intrinsics(size);
  std::vector<CameraPose> poses;
  for (const double a : {1.75, 3.14159, 4.5}) {
    const Vec3 eye(3.0 * std::cos(a), 0.9, 3.0 * std::sin(a));
    poses.push_back(look_at(eye, Vec3::Zero(), Vec3::UnitY(), intr));
  }
  return poses;
}

}  // namespace ocnerf
