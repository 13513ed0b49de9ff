// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/optimizer.hpp"

#include <cmath>

#include "ocnerf/errors.hpp"

namespace ocnerf {

void AdamConfig::validate() const {
  if (!(lr >= 0.0) || !(lr_final >= 0.0)) throw ConfigError("learning rates must be >= 0");
  if (decay_steps < 1) throw ConfigError("decay_steps must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
  if (!(grid_lr_scale >= 0.0)) throw ConfigError("grid_lr_scale must be >= 0");
}

double AdamConfig::rate(std::int64_t step) const {
  if (lr == 0.0 || lr_final == 0.0) return lr;
  const double frac = std::min(1.0, static_cast<double>(step) / decay_steps);
  return lr * std::pow(lr_final / lr, frac);
}

template <class T>
Adam<T>::Adam(const FieldNetwork<T>& net, const AdamConfig& cfg) : cfg_(cfg) {
  cfg.validate();
  FieldGrad<T> shape = net.zero_grad();
  shape.visit([&](const std::string&, std::span<T> v, const auto&) {
    m_.emplace_back(v.size(), T(0));
    v_.emplace_back(v.size(), T(0));
  });
}

template <class T>
void Adam<T>::step(FieldNetwork<T>& net, FieldGrad<T>& grad) {
  std::vector<std::span<T>> grads;
  grad.visit([&](const std::string&, std::span<T> g, const auto&) { grads.push_back(g); });
  const double lr = cfg_.rate(step_);
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  const T b1 = static_cast<T>(cfg_.beta1);
  const T b2 = static_cast<T>(cfg_.beta2);
  const T eps = static_cast<T>(cfg_.epsilon);
  std::size_t i = 0;
  net.visit_parameters([&](const std::string& name, std::span<T> p, const auto&) {
    if (i >= grads.size() || grads[i].size() != p.size()) throw UsageError("optimizer state does not match network");
    const T rate = static_cast<T>(lr * (is_grid_tensor(name) ? cfg_.grid_lr_scale : 1.0) / bc1);
    const T inv_bc2 = static_cast<T>(1.0 / bc2);
    const std::span<T> g = grads[i];
    T* m = m_[i].data();
    T* v = v_[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      p[j] -= rate * m[j] / (std::sqrt(v[j] * inv_bc2) + eps);
    }
    ++i;
  });
}

template class Adam<float>;
template class Adam<double>;

}  // namespace ocnerf
