// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/branch.hpp"

#include <cmath>

#include "ocnerf/errors.hpp"

namespace ocnerf {

template <class T>
T softplus(T z) {
  return z > T(20) ? z : std::log1p(std::exp(z));
}

template <class T>
T sigmoid(T z) {
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

namespace {

template <class T>
Linear<T> make_linear(int in, int out) {
  return {RowMatrix<T>::Zero(out, in), Vector<T>::Zero(out)};
}

template <class T>
void fill_uniform(RowMatrix<T>& w, double bound, CounterRng& rng) {
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<T>(rng.uniform(-bound, bound));
}

template <class T>
void apply(const Linear<T>& layer, const Matrix<T>& in, Matrix<T>& out) {
  out.noalias() = layer.weight * in;
  out.colwise() += layer.bias;
}

template <class T>
void accumulate(Linear<T>& grad, const Matrix<T>& dz, const Matrix<T>& in) {
  grad.weight.noalias() += dz * in.transpose();
  grad.bias += dz.rowwise().sum();
}

template <class T>
void visit_linear(Linear<T>& l, const std::string& name, const TensorVisitor<T>& fn) {
  fn(name + ".weight", std::span<T>(l.weight.data(), static_cast<std::size_t>(l.weight.size())),
     {l.weight.rows(), l.weight.cols()});
  fn(name + ".bias", std::span<T>(l.bias.data(), static_cast<std::size_t>(l.bias.size())), {l.bias.size()});
}

}  // namespace

template <class T>
Branch<T>::Branch(const BranchConfig& cfg) : cfg_(cfg) {
  if (cfg.input_dim < 1 || cfg.dir_dim < 0 || cfg.depth < 1 || cfg.width < 1 || cfg.color_width < 1)
    throw ConfigError("branch dimensions must be positive");
  int in = cfg.input_dim;
  for (int l = 0; l < cfg.depth; ++l) {
    trunk_.push_back(make_linear<T>(in, cfg.width));
    in = cfg.width;
  }
  density_ = make_linear<T>(cfg.width, 1);
  color_hidden_ = make_linear<T>(cfg.width + cfg.dir_dim, cfg.color_width);
  color_out_ = make_linear<T>(cfg.color_width, 3);
}

template <class T>
Branch<T> Branch<T>::init(const BranchConfig& cfg, CounterRng& rng) {
  Branch b(cfg);
  for (auto& l : b.trunk_) fill_uniform(l.weight, std::sqrt(6.0 / l.weight.cols()), rng);
  fill_uniform(b.density_.weight, 1.0 / std::sqrt(double(b.density_.weight.cols())), rng);
  fill_uniform(b.color_hidden_.weight, std::sqrt(6.0 / b.color_hidden_.weight.cols()), rng);
  fill_uniform(b.color_out_.weight, 1.0 / std::sqrt(double(b.color_out_.weight.cols())), rng);
  b.density_.bias.setConstant(static_cast<T>(cfg.density_bias_init));
  return b;
}

template <class T>
BranchOutput<T> Branch<T>::forward(const Matrix<T>& input, const Matrix<T>& dir, BranchCache<T>* cache) const {
  if (input.rows() != cfg_.input_dim || dir.rows() != cfg_.dir_dim || dir.cols() != input.cols())
    throw ConfigError("branch input dimensions do not match its configuration");
  const Eigen::Index n = input.cols();
  BranchCache<T> local;
  BranchCache<T>& c = cache ? *cache : local;
  c.input = input;
  c.trunk.resize(trunk_.size());
  const Matrix<T>* h = &c.input;
  for (std::size_t l = 0; l < trunk_.size(); ++l) {
    apply(trunk_[l], *h, c.trunk[l]);
    c.trunk[l] = c.trunk[l].cwiseMax(T(0));
    h = &c.trunk[l];
  }
  apply(density_, *h, c.density_pre);
  c.color_in.resize(cfg_.width + cfg_.dir_dim, n);
  c.color_in.topRows(cfg_.width) = *h;
  c.color_in.bottomRows(cfg_.dir_dim) = dir;
  apply(color_hidden_, c.color_in, c.color_hidden);
  c.color_hidden = c.color_hidden.cwiseMax(T(0));
  Matrix<T> color_pre;
  apply(color_out_, c.color_hidden, color_pre);

  BranchOutput<T> out;
  out.sigma = c.density_pre.unaryExpr([](T z) { return softplus(z); });
  out.color = color_pre.unaryExpr([](T z) { return sigmoid(z); });
  return out;
}

template <class T>
Matrix<T> Branch<T>::backward(const BranchCache<T>& c, const BranchOutput<T>& out,
                              const Eigen::Matrix<T, 1, Eigen::Dynamic>& dsigma,
                              const Eigen::Matrix<T, 3, Eigen::Dynamic>& dcolor, Branch& grad) const {
  const Eigen::Index n = c.input.cols();
  if (dsigma.cols() != n || dcolor.cols() != n) throw ConfigError("branch backward: gradient size mismatch");

  // sigmoid'(z) = c (1 - c); softplus'(z) = sigmoid(z)
  const Matrix<T> dcolor_pre = (dcolor.array() * out.color.array() * (T(1) - out.color.array())).matrix();
  const Matrix<T> ddensity_pre =
      (dsigma.array() * c.density_pre.array().unaryExpr([](T z) { return sigmoid(z); })).matrix();

  accumulate(grad.color_out_, dcolor_pre, c.color_hidden);
  Matrix<T> dhidden = color_out_.weight.transpose() * dcolor_pre;
  dhidden = (c.color_hidden.array() > T(0)).select(dhidden, T(0));
  accumulate(grad.color_hidden_, dhidden, c.color_in);
  Matrix<T> dh = color_hidden_.weight.leftCols(cfg_.width).transpose() * dhidden;

  const Matrix<T>& trunk_out = c.trunk.back();
  accumulate(grad.density_, ddensity_pre, trunk_out);
  dh.noalias() += density_.weight.transpose() * ddensity_pre;

  for (std::size_t l = trunk_.size(); l-- > 0;) {
    const Matrix<T> dz = (c.trunk[l].array() > T(0)).select(dh, T(0));
    const Matrix<T>& in = l == 0 ? c.input : c.trunk[l - 1];
    accumulate(grad.trunk_[l], dz, in);
    dh.noalias() = trunk_[l].weight.transpose() * dz;
  }
  return dh;
}

template <class T>
void Branch<T>::set_zero() {
  for (auto& l : trunk_) {
    l.weight.setZero();
    l.bias.setZero();
  }
  for (Linear<T>* l : {&density_, &color_hidden_, &color_out_}) {
    l->weight.setZero();
    l->bias.setZero();
  }
}

template <class T>
void Branch<T>::visit(const std::string& prefix, const TensorVisitor<T>& fn) {
  for (std::size_t l = 0; l < trunk_.size(); ++l) visit_linear(trunk_[l], prefix + ".trunk" + std::to_string(l), fn);
  visit_linear(density_, prefix + ".density", fn);
  visit_linear(color_hidden_, prefix + ".color_hidden", fn);
  visit_linear(color_out_, prefix + ".color_out", fn);
}

template <class T>
std::size_t Branch<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : trunk_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  for (const Linear<T>* l : {&density_, &color_hidden_, &color_out_})
    n += static_cast<std::size_t>(l->weight.size() + l->bias.size());
  return n;
}

template float softplus(float);
template double softplus(double);
template float sigmoid(float);
template double sigmoid(double);
template class Branch<float>;
template class Branch<double>;

}  // namespace ocnerf
