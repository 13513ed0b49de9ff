// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/composite.hpp"

#include <cmath>

#include "ocnerf/errors.hpp"

namespace ocnerf {

namespace {

template <class T>
void check_inputs(const SampleSet& samples, std::span<const T> sigma, const RgbBlock<T>& color) {
  const std::size_t n = samples.size();
  if (sigma.size() != n || static_cast<std::size_t>(color.cols()) != n || samples.delta.size() != n ||
      samples.keep.size() != n)
    throw InputError("composite: per-sample arrays differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!samples.keep[i]) continue;
    if (!std::isfinite(sigma[i])) throw NumericError("composite: non-finite density");
    if (sigma[i] < T(0)) throw InputError("composite: density must be >= 0");
  }
}

template <class T>
T effective_sigma(const SampleSet& s, std::span<const T> sigma, std::size_t i) {
  return s.keep[i] ? sigma[i] : T(0);
}

}  // namespace

template <class T>
RenderResult<T> composite(const SampleSet& samples, std::span<const T> sigma, const RgbBlock<T>& color,
                          const Rgb<T>& background) {
  check_inputs(samples, sigma, color);
  const std::size_t n = samples.size();
  RenderResult<T> out;
  out.weights.resize(n);
  T optical_depth = T(0);
  T weighted_t = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    const T tau = effective_sigma(samples, sigma, i) * static_cast<T>(samples.delta[i]);
    const T transmittance = std::exp(-optical_depth);
    const T alpha = -std::expm1(-tau);
    const T w = transmittance * alpha;
    out.weights[i] = w;
    out.color += w * color.col(static_cast<Eigen::Index>(i));
    out.opacity += w;
    weighted_t += w * static_cast<T>(samples.t[i]);
    optical_depth += tau;
  }
  out.color += (T(1) - out.opacity) * background;
  out.depth = weighted_t / std::max(out.opacity, static_cast<T>(kDepthEpsilon));
  out.terminal_depth = weighted_t + (T(1) - out.opacity) * static_cast<T>(samples.far);
  return out;
}

template <class T>
CompositeGradient<T> composite_backward(const SampleSet& samples, std::span<const T> sigma,
                                        const RgbBlock<T>& color, const Rgb<T>& background,
                                        const RenderResult<T>& result, const CompositeUpstream<T>& up) {
  check_inputs(samples, sigma, color);
  const std::size_t n = samples.size();
  CompositeGradient<T> grad;
  grad.dsigma.assign(n, T(0));
  grad.dcolor = RgbBlock<T>::Zero(3, static_cast<Eigen::Index>(n));

  const T eps = static_cast<T>(kDepthEpsilon);
  const bool normalised = result.opacity > eps;
  const T far = static_cast<T>(samples.far);

  // g_j = dL/dw_j
  std::vector<T> g(n);
  for (std::size_t j = 0; j < n; ++j) {
    const T tj = static_cast<T>(samples.t[j]);
    const T ddepth_dw = normalised ? (tj - result.depth) / result.opacity : tj / eps;
    g[j] = up.dcolor.dot(color.col(static_cast<Eigen::Index>(j)) - background) + up.dopacity +
           up.ddepth * ddepth_dw + up.dterminal_depth * (tj - far);
  }

  // dL/dsigma_i = delta_i * (T_{i+1} g_i - sum_{j>i} w_j g_j)
  std::vector<T> transmittance_after(n);
  T optical_depth = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    optical_depth += effective_sigma(samples, sigma, i) * static_cast<T>(samples.delta[i]);
    transmittance_after[i] = std::exp(-optical_depth);
  }
  T suffix = T(0);
  for (std::size_t i = n; i-- > 0;) {
    if (samples.keep[i]) {
      const T w = result.weights[i];
      grad.dsigma[i] = static_cast<T>(samples.delta[i]) * (transmittance_after[i] * g[i] - suffix);
      grad.dcolor.col(static_cast<Eigen::Index>(i)) = w * up.dcolor;
      suffix += w * g[i];
    }
  }
  return grad;
}

template RenderResult<float> composite(const SampleSet&, std::span<const float>, const RgbBlock<float>&,
                                       const Rgb<float>&);
template RenderResult<double> composite(const SampleSet&, std::span<const double>, const RgbBlock<double>&,
                                        const Rgb<double>&);
template CompositeGradient<float> composite_backward(const SampleSet&, std::span<const float>,
                                                     const RgbBlock<float>&, const Rgb<float>&,
                                                     const RenderResult<float>&, const CompositeUpstream<float>&);
template CompositeGradient<double> composite_backward(const SampleSet&, std::span<const double>,
                                                      const RgbBlock<double>&, const Rgb<double>&,
                                                      const RenderResult<double>&,
                                                      const CompositeUpstream<double>&);

}  // namespace ocnerf
