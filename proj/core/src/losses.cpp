// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/losses.hpp"

#include <cmath>
#include <map>

#include "ocnerf/errors.hpp"

namespace ocnerf {

void LossConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !(lambda_depth >= 0.0))
    throw ConfigError("loss weights must be >= 0");
}

void RayTargets::validate() const {
  const std::size_t n = color.size();
  if (object.size() != n || mask.size() != n || weight.size() != n || depth.size() != n)
    throw InputError("ray target arrays differ in length");
}

std::vector<double> balanced_weight(std::span<const int> object, std::span<const std::uint8_t> mask) {
  if (object.size() != mask.size()) throw InputError("balanced_weight: object/mask length mismatch");
  std::map<int, std::pair<double, double>> counts;  // k -> (n0, n1)
  for (std::size_t r = 0; r < object.size(); ++r) {
    auto& c = counts[object[r]];
    (mask[r] ? c.second : c.first) += 1.0;
  }
  std::vector<double> w(object.size(), 1.0);
  for (std::size_t r = 0; r < object.size(); ++r) {
    const auto [n0, n1] = counts[object[r]];
    if (n0 == 0.0 || n1 == 0.0) continue;
    w[r] = mask[r] ? n0 / (n0 + n1) : n1 / (n0 + n1);
  }
  return w;
}

template <class T>
double object_loss(const RayTargets& targets, std::span<const RenderResult<T>> renders, const LossConfig& cfg,
                   std::vector<CompositeUpstream<T>>* grad) {
  targets.validate();
  if (renders.size() != targets.size()) throw InputError("object_loss: render/batch length mismatch");
  if (grad) grad->assign(renders.size(), CompositeUpstream<T>{});
  double loss = 0.0;
  for (std::size_t r = 0; r < renders.size(); ++r) {
    const double m = targets.mask[r] ? 1.0 : 0.0;
    const Vec3 dc = renders[r].color.template cast<double>() - targets.color[r];
    const double dop = static_cast<double>(renders[r].opacity) - m;
    const double w = cfg.balanced ? targets.weight[r] : 1.0;
    loss += cfg.lambda1 * m * dc.squaredNorm() + cfg.lambda2 * w * dop * dop;
    if (grad) {
      (*grad)[r].dcolor = (2.0 * cfg.lambda1 * m * dc).cast<T>();
      (*grad)[r].dopacity = static_cast<T>(2.0 * cfg.lambda2 * w * dop);
    }
  }
  return loss;
}

template <class T>
double scene_loss(const RayTargets& targets, std::span<const RenderResult<T>> renders, const LossConfig& cfg,
                  std::vector<CompositeUpstream<T>>* grad) {
  targets.validate();
  if (renders.size() != targets.size()) throw InputError("scene_loss: render/batch length mismatch");
  if (grad) grad->assign(renders.size(), CompositeUpstream<T>{});
  double loss = 0.0;
  for (std::size_t r = 0; r < renders.size(); ++r) {
    const Vec3 dc = renders[r].color.template cast<double>() - targets.color[r];
    loss += dc.squaredNorm();
    if (grad) (*grad)[r].dcolor = (2.0 * dc).cast<T>();
    if (cfg.lambda_depth > 0.0 && std::isfinite(targets.depth[r])) {
      const double dd = static_cast<double>(renders[r].terminal_depth) - targets.depth[r];
      loss += cfg.lambda_depth * dd * dd;
      if (grad) (*grad)[r].dterminal_depth = static_cast<T>(2.0 * cfg.lambda_depth * dd);
    }
  }
  return loss;
}

template <class T>
double total_loss(const RayTargets& targets, std::span<const RenderResult<T>> scene,
                  std::span<const RenderResult<T>> object, const LossConfig& cfg) {
  return object_loss<T>(targets, object, cfg) + scene_loss<T>(targets, scene, cfg);
}

#define OCNERF_INSTANTIATE(T)                                                                               \
  template double object_loss(const RayTargets&, std::span<const RenderResult<T>>, const LossConfig&,       \
                              std::vector<CompositeUpstream<T>>*);                                          \
  template double scene_loss(const RayTargets&, std::span<const RenderResult<T>>, const LossConfig&,        \
                             std::vector<CompositeUpstream<T>>*);                                           \
  template double total_loss(const RayTargets&, std::span<const RenderResult<T>>,                           \
                             std::span<const RenderResult<T>>, const LossConfig&);
OCNERF_INSTANTIATE(float)
OCNERF_INSTANTIATE(double)
#undef OCNERF_INSTANTIATE

}  // namespace ocnerf
