// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "ocnerf/field_network.hpp"

namespace ocnerf {

struct AdamConfig {
  double lr = 5e-4;
  /// Learning rate reached after decay_steps (exponential decay).
  double lr_final = 5e-5;
  int decay_steps = 2000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Multiplier on the learning rate of voxel-grid features.
  double grid_lr_scale = 1.0;

  void validate() const;
  double rate(std::int64_t step) const;
};

template <class T>
class Adam {
 public:
  Adam() = default;
  Adam(const FieldNetwork<T>& net, const AdamConfig& cfg);

  /// One update of every tensor in `net` from `grad`.
  void step(FieldNetwork<T>& net, FieldGrad<T>& grad);
  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::int64_t step_ = 0;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
};

}  // namespace ocnerf
