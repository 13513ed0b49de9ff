// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/render.hpp"

#include <algorithm>

#include "ocnerf/parallel.hpp"
#include "ocnerf/rng.hpp"

namespace ocnerf {

SampleSet ray_samples(const Ray& ray, const RenderConfig& cfg) {
  const std::uint64_t seed = CounterRng(cfg.seed, static_cast<std::uint64_t>(ray.pixel.row),
                                        static_cast<std::uint64_t>(ray.pixel.col))
                                 .next();
  return stratified_sample(ray, cfg.samples, cfg.jitter, seed);
}

template <class T>
FieldValues<T> evaluate_branch(const FieldNetwork<T>& net, BranchKind kind, int k, std::span<const Vec3> x,
                               std::span<const Vec3> d) {
  const std::vector<int> ids(kind == BranchKind::object ? x.size() : 0, k);
  const FieldEval<T> ev = net.forward(kind, x, d, ids, false);
  FieldValues<T> out;
  out.sigma.assign(ev.out.sigma.data(), ev.out.sigma.data() + ev.out.sigma.size());
  out.color = ev.out.color;
  return out;
}

template <class T>
RenderResult<T> render_samples(const FieldNetwork<T>& net, BranchKind kind, int k, const Ray& ray,
                               const SampleSet& samples, const Vec3& background) {
  const std::vector<Vec3> d(samples.size(), ray.direction);
  const FieldValues<T> v = evaluate_branch(net, kind, k, samples.x, d);
  const Rgb<T> bg = kind == BranchKind::scene ? Rgb<T>(background.cast<T>()) : Rgb<T>::Zero();
  return composite<T>(samples, v.sigma, v.color, bg);
}

template <class T>
RenderResult<T> render_ray(const FieldNetwork<T>& net, BranchKind kind, int k, const Ray& ray,
                           const RenderConfig& cfg) {
  return render_samples(net, kind, k, ray, ray_samples(ray, cfg), cfg.background);
}

template <class T>
std::vector<RenderResult<T>> render_rays(const FieldNetwork<T>& net, BranchKind kind, int k,
                                         std::span<const Ray> rays, const RenderConfig& cfg) {
  std::vector<RenderResult<T>> out(rays.size());
  const std::size_t chunk = static_cast<std::size_t>(std::max(1, cfg.chunk_rays));
  const std::size_t chunks = (rays.size() + chunk - 1) / chunk;
  const Rgb<T> bg = kind == BranchKind::scene ? Rgb<T>(cfg.background.cast<T>()) : Rgb<T>::Zero();
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
    const FieldValues<T> v = evaluate_branch(net, kind, k, x, d);
    std::size_t offset = 0;
    for (std::size_t r = begin; r < end; ++r) {
      const SampleSet& s = sets[r - begin];
      const auto n = static_cast<Eigen::Index>(s.size());
      out[r] = composite<T>(s, std::span<const T>(v.sigma).subspan(offset, s.size()),
                            v.color.middleCols(static_cast<Eigen::Index>(offset), n), bg);
      offset += s.size();
    }
  });
  return out;
}

RenderResult<double> render_samples(const AnalyticField& field, const SampleSet& samples, const Vec3& background) {
  std::vector<double> sigma(samples.size());
  RgbBlock<double> color(3, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const FieldSample f = field(samples.x[i]);
    sigma[i] = f.sigma;
    color.col(static_cast<Eigen::Index>(i)) = f.color;
  }
  return composite<double>(samples, sigma, color, background);
}

std::vector<Ray> view_rays(const CameraPose& pose, const RayBounds& bounds) {
  const int w = pose.intrinsics.width;
  const int h = pose.intrinsics.height;
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(w) * h);
  for (int row = 0; row < h; ++row)
    for (int col = 0; col < w; ++col) rays.push_back(camera_ray(pose, Pixel{row, col}, bounds));
  return rays;
}

BranchImage render_branch_view(const FieldNetwork<float>& net, BranchKind kind, int k, const CameraPose& pose,
                               const RenderConfig& cfg) {
  const std::vector<Ray> rays = view_rays(pose, cfg.ray_bounds);
  const auto results = render_rays<float>(net, kind, k, rays, cfg);
  BranchImage img;
  img.width = pose.intrinsics.width;
  img.height = pose.intrinsics.height;
  img.rgb.resize(3 * rays.size());
  img.opacity.resize(rays.size());
  img.depth.resize(rays.size());
  for (std::size_t i = 0; i < rays.size(); ++i) {
    for (int c = 0; c < 3; ++c) img.rgb[3 * i + static_cast<std::size_t>(c)] = results[i].color[c];
    img.opacity[i] = results[i].opacity;
    img.depth[i] = results[i].terminal_depth;
  }
  return img;
}

#define OCNERF_INSTANTIATE(T)                                                                                   \
  template FieldValues<T> evaluate_branch(const FieldNetwork<T>&, BranchKind, int, std::span<const Vec3>,       \
                                          std::span<const Vec3>);                                               \
  template RenderResult<T> render_samples(const FieldNetwork<T>&, BranchKind, int, const Ray&, const SampleSet&, \
                                          const Vec3&);                                                         \
  template RenderResult<T> render_ray(const FieldNetwork<T>&, BranchKind, int, const Ray&, const RenderConfig&); \
  template std::vector<RenderResult<T>> render_rays(const FieldNetwork<T>&, BranchKind, int, std::span<const Ray>, \
                                                    const RenderConfig&);
OCNERF_INSTANTIATE(float)
OCNERF_INSTANTIATE(double)
#undef OCNERF_INSTANTIATE

}  // namespace ocnerf
