// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ocnerf/rng.hpp"

namespace ocnerf {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
struct Linear {
  RowMatrix<T> weight;  // out x in
  Vector<T> bias;       // out
};

/// Shape of one radiance-field branch:
///   trunk:  depth x (Linear + ReLU), width wide
///   sigma = softplus(Linear(trunk))
///   color = sigmoid(Linear(ReLU(Linear([trunk, dir]))))
struct BranchConfig {
  int input_dim = 0;
  int dir_dim = 0;
  int depth = 4;
  int width = 128;
  int color_width = 64;
  double density_bias_init = 0.0;
};

/// Activations recorded by Branch::forward for Branch::backward.
template <class T>
struct BranchCache {
  Matrix<T> input;
  std::vector<Matrix<T>> trunk;  // post-ReLU output of each trunk layer
  Matrix<T> density_pre;
  Matrix<T> color_in;
  Matrix<T> color_hidden;
};

template <class T>
struct BranchOutput {
  Eigen::Matrix<T, 1, Eigen::Dynamic> sigma;
  Eigen::Matrix<T, 3, Eigen::Dynamic> color;
};

/// Per-tensor visitor: name, storage, shape.
template <class T>
using TensorVisitor = std::function<void(const std::string&, std::span<T>, const std::vector<std::int64_t>&)>;

/// One MLP pathway. Columns of the input matrices are points.
template <class T>
class Branch {
 public:
  Branch() = default;
  explicit Branch(const BranchConfig& cfg);
  /// He-uniform trunk weights, fan-in uniform heads, zero biases except the
  /// density bias.
  static Branch init(const BranchConfig& cfg, CounterRng& rng);

  const BranchConfig& config() const { return cfg_; }

  /// Throws ConfigError when input rows do not match the configured dims.
  BranchOutput<T> forward(const Matrix<T>& input, const Matrix<T>& dir, BranchCache<T>* cache) const;
  /// Accumulates parameter gradients into `grad` (same shape as *this) and
  /// returns d(loss)/d(input).
  Matrix<T> backward(const BranchCache<T>& cache, const BranchOutput<T>& out,
                     const Eigen::Matrix<T, 1, Eigen::Dynamic>& dsigma,
                     const Eigen::Matrix<T, 3, Eigen::Dynamic>& dcolor, Branch& grad) const;

  void set_zero();
  void visit(const std::string& prefix, const TensorVisitor<T>& fn);
  std::size_t parameter_count() const;

  std::vector<Linear<T>>& trunk() { return trunk_; }
  Linear<T>& density() { return density_; }
  Linear<T>& color_hidden() { return color_hidden_; }
  Linear<T>& color_out() { return color_out_; }
  const std::vector<Linear<T>>& trunk() const { return trunk_; }
  const Linear<T>& density() const { return density_; }
  const Linear<T>& color_hidden() const { return color_hidden_; }
  const Linear<T>& color_out() const { return color_out_; }

 private:
  BranchConfig cfg_;
  std::vector<Linear<T>> trunk_;
  Linear<T> density_;
  Linear<T> color_hidden_;
  Linear<T> color_out_;
};

template <class T>
T softplus(T z);
template <class T>
T sigmoid(T z);

}  // namespace ocnerf
