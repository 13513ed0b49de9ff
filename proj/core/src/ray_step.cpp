// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/ray_step.hpp"

#include <algorithm>

#include "ocnerf/errors.hpp"
#include "ocnerf/parallel.hpp"
#include "ocnerf/rng.hpp"

namespace ocnerf {

void StepConfig::validate() const {
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (chunk_rays < 1 || shards < 1) throw ConfigError("chunk_rays and shards must be >= 1");
  guard.validate();
  loss.validate();
}

namespace {

std::uint64_t ray_seed(std::uint64_t seed, std::size_t ray, std::uint64_t stream) {
  return CounterRng(seed, ray, stream).next();
}

RayTargets targets_of(std::span<const TrainRay> rays) {
  RayTargets t;
  for (const TrainRay& r : rays) {
    t.color.push_back(r.color);
    t.object.push_back(r.object);
    t.mask.push_back(r.mask);
    t.weight.push_back(r.weight);
    t.depth.push_back(r.depth);
  }
  return t;
}

struct ChunkResult {
  double scene_loss = 0.0;
  double object_loss = 0.0;
  GuardStats stats;
};

template <class T>
ChunkResult run_chunk(const FieldNetwork<T>& net, std::span<const TrainRay> rays, std::size_t first,
                      const StepConfig& cfg, std::uint64_t seed, std::span<RayPlan> plans, bool have_plans,
                      FieldGrad<T>* grad, StepTrace<T>* trace) {
  ChunkResult res;
  const std::size_t n = rays.size();
  const RayTargets targets = targets_of(rays);
  const Rgb<T> bg = cfg.background.cast<T>();

  // Scene pass.
  if (!have_plans)
    for (std::size_t r = 0; r < n; ++r)
      plans[r].scene = stratified_sample(rays[r].ray, cfg.samples, cfg.jitter, ray_seed(seed, first + r, 0));
  std::vector<Vec3> x;
  std::vector<Vec3> d;
  for (std::size_t r = 0; r < n; ++r) {
    x.insert(x.end(), plans[r].scene.x.begin(), plans[r].scene.x.end());
    d.insert(d.end(), plans[r].scene.size(), rays[r].ray.direction);
  }
  const FieldEval<T> scene_eval = net.forward(BranchKind::scene, x, d, {}, grad != nullptr);
  std::vector<RenderResult<T>> scene(n);
  std::vector<std::size_t> scene_offset(n + 1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t off = scene_offset[r];
    const std::size_t len = plans[r].scene.size();
    scene_offset[r + 1] = off + len;
    scene[r] = composite<T>(plans[r].scene, std::span<const T>(scene_eval.out.sigma.data() + off, len),
                            scene_eval.out.color.middleCols(static_cast<Eigen::Index>(off),
                                                            static_cast<Eigen::Index>(len)),
                            bg);
  }
  std::vector<CompositeUpstream<T>> scene_up;
  res.scene_loss = scene_loss<T>(targets, scene, cfg.loss, grad ? &scene_up : nullptr);
  if (grad) {
    Eigen::Matrix<T, 1, Eigen::Dynamic> dsigma(1, static_cast<Eigen::Index>(x.size()));
    Eigen::Matrix<T, 3, Eigen::Dynamic> dcolor(3, static_cast<Eigen::Index>(x.size()));
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t off = scene_offset[r];
      const std::size_t len = plans[r].scene.size();
      const auto g = composite_backward<T>(
          plans[r].scene, std::span<const T>(scene_eval.out.sigma.data() + off, len),
          scene_eval.out.color.middleCols(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(len)), bg,
          scene[r], scene_up[r]);
      for (std::size_t i = 0; i < len; ++i) dsigma(static_cast<Eigen::Index>(off + i)) = g.dsigma[i];
      dcolor.middleCols(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(len)) = g.dcolor;
    }
    net.backward(scene_eval, dsigma, dcolor, *grad);
  }

  // Object pass on kept samples only.
  x.clear();
  d.clear();
  std::vector<int> ids;
  for (std::size_t r = 0; r < n; ++r) {
    if (!have_plans)
      plans[r].object = guarded_object_pass<T>(rays[r].ray, plans[r].scene, scene[r], rays[r].mask, cfg.guard,
                                               ray_seed(seed, first + r, 1), &res.stats);
    else {
      res.stats.samples += plans[r].object.samples.size();
      res.stats.pruned += plans[r].object.decision.pruned();
    }
    const SampleSet& s = plans[r].object.samples;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s.keep[i]) continue;
      x.push_back(s.x[i]);
      d.push_back(rays[r].ray.direction);
      ids.push_back(rays[r].object);
    }
  }
  const FieldEval<T> obj_eval = net.forward(BranchKind::object, x, d, ids, grad != nullptr);
  std::vector<RenderResult<T>> object(n);
  std::vector<std::vector<T>> sigma(n);
  std::vector<RgbBlock<T>> color(n);
  std::size_t col = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const SampleSet& s = plans[r].object.samples;
    sigma[r].assign(s.size(), T(0));
    color[r] = RgbBlock<T>::Zero(3, static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s.keep[i]) continue;
      sigma[r][i] = obj_eval.out.sigma(static_cast<Eigen::Index>(col));
      color[r].col(static_cast<Eigen::Index>(i)) = obj_eval.out.color.col(static_cast<Eigen::Index>(col));
      ++col;
    }
    object[r] = composite<T>(s, sigma[r], color[r], Rgb<T>::Zero());
  }
  std::vector<CompositeUpstream<T>> obj_up;
  res.object_loss = object_loss<T>(targets, object, cfg.loss, (grad || trace) ? &obj_up : nullptr);
  if (grad || trace) {
    Eigen::Matrix<T, 1, Eigen::Dynamic> dsigma(1, static_cast<Eigen::Index>(x.size()));
    Eigen::Matrix<T, 3, Eigen::Dynamic> dcolor(3, static_cast<Eigen::Index>(x.size()));
    col = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const SampleSet& s = plans[r].object.samples;
      const auto g = composite_backward<T>(s, sigma[r], color[r], Rgb<T>::Zero(), object[r], obj_up[r]);
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.keep[i]) continue;
        dsigma(static_cast<Eigen::Index>(col)) = g.dsigma[i];
        dcolor.col(static_cast<Eigen::Index>(col)) = g.dcolor.col(static_cast<Eigen::Index>(i));
        ++col;
      }
      if (trace) {
        trace->object_dsigma[first + r] = g.dsigma;
        trace->object_dcolor[first + r] = g.dcolor;
      }
    }
    if (grad) net.backward(obj_eval, dsigma, dcolor, *grad);
  }
  if (trace)
    for (std::size_t r = 0; r < n; ++r) {
      trace->scene[first + r] = scene[r];
      trace->object[first + r] = object[r];
    }
  return res;
}

}  // namespace

template <class T>
std::vector<RayPlan> plan_rays(const FieldNetwork<T>& net, std::span<const TrainRay> rays, const StepConfig& cfg,
                               std::uint64_t seed) {
  return ray_step<T>(net, rays, cfg, seed, nullptr, nullptr).plans;
}

template <class T>
StepOutput ray_step(const FieldNetwork<T>& net, std::span<const TrainRay> rays, const StepConfig& cfg,
                    std::uint64_t seed, const std::vector<RayPlan>* plans, FieldGrad<T>* grad,
                    StepTrace<T>* trace) {
  cfg.validate();
  if (plans && plans->size() != rays.size()) throw InputError("ray plans do not match the batch");
  StepOutput out;
  out.plans = plans ? *plans : std::vector<RayPlan>(rays.size());
  if (trace) {
    trace->object_dsigma.assign(rays.size(), {});
    trace->object_dcolor.assign(rays.size(), {});
    trace->scene.assign(rays.size(), {});
    trace->object.assign(rays.size(), {});
  }
  const std::size_t chunk = static_cast<std::size_t>(cfg.chunk_rays);
  const std::size_t chunks = (rays.size() + chunk - 1) / chunk;
  const std::size_t shards = std::min<std::size_t>(static_cast<std::size_t>(cfg.shards), std::max<std::size_t>(chunks, 1));
  std::vector<ChunkResult> results(chunks);
  std::vector<FieldGrad<T>> shard_grad;
  if (grad) {
    shard_grad.reserve(shards);
    shard_grad.push_back(std::move(*grad));
    for (std::size_t s = 1; s < shards; ++s) shard_grad.push_back(net.zero_grad());
  }
  try {
    parallel_for(shards, cfg.workers, [&](std::size_t s) {
      for (std::size_t c = s; c < chunks; c += shards) {
        const std::size_t begin = c * chunk;
        const std::size_t len = std::min(rays.size(), begin + chunk) - begin;
        results[c] = run_chunk<T>(net, rays.subspan(begin, len), begin, cfg, seed,
                                  std::span<RayPlan>(out.plans).subspan(begin, len), plans != nullptr,
                                  grad ? &shard_grad[s] : nullptr, trace);
      }
    });
  } catch (...) {
    if (grad) *grad = std::move(shard_grad.front());
    throw;
  }
  if (grad) {
    for (std::size_t s = 1; s < shards; ++s) shard_grad.front().add(shard_grad[s]);
    *grad = std::move(shard_grad.front());
  }
  for (const ChunkResult& r : results) {
    out.scene_loss += r.scene_loss;
    out.object_loss += r.object_loss;
    out.stats.add(r.stats);
  }
  return out;
}

#define OCNERF_INSTANTIATE(T)                                                                                      \
  template std::vector<RayPlan> plan_rays(const FieldNetwork<T>&, std::span<const TrainRay>, const StepConfig&,    \
                                          std::uint64_t);                                                          \
  template StepOutput ray_step(const FieldNetwork<T>&, std::span<const TrainRay>, const StepConfig&, std::uint64_t, \
                               const std::vector<RayPlan>*, FieldGrad<T>*, StepTrace<T>*);
OCNERF_INSTANTIATE(float)
OCNERF_INSTANTIATE(double)
#undef OCNERF_INSTANTIATE

}  // namespace ocnerf
