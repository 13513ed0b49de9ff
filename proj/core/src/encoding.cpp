// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/encoding.hpp"

#include <cmath>
#include <numbers>

#include "ocnerf/errors.hpp"

namespace ocnerf {

template <class T>
void positional_encode(std::span<const T> in, const EncodingConfig& cfg, std::span<T> out) {
  const int block = cfg.output_dim(1);
  if (out.size() != in.size() * static_cast<std::size_t>(block))
    throw ConfigError("positional_encode: output size does not match encoding config");
  std::size_t o = 0;
  for (const T v : in) {
    if (!std::isfinite(v)) throw NumericError("positional_encode: non-finite input");
    if (cfg.include_identity) out[o++] = v;
    if (cfg.frequencies == 0) continue;
    // Double-angle recurrence: one sin/cos pair per component.
    T s = std::sin(std::numbers::pi_v<T> * v);
    T c = std::cos(std::numbers::pi_v<T> * v);
    for (int j = 0; j < cfg.frequencies; ++j) {
      out[o++] = s;
      out[o++] = c;
      const T s2 = T(2) * s * c;
      c = c * c - s * s;
      s = s2;
    }
  }
}

template <class T>
void positional_encode_backward(std::span<const T> in, const EncodingConfig& cfg, std::span<const T> dout,
                                std::span<T> din) {
  std::size_t o = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const T v = in[i];
    T acc = T(0);
    if (cfg.include_identity) acc += dout[o++];
    if (cfg.frequencies > 0) {
      T freq = std::numbers::pi_v<T>;
      T s = std::sin(freq * v);
      T c = std::cos(freq * v);
      for (int j = 0; j < cfg.frequencies; ++j) {
        acc += dout[o++] * freq * c;
        acc -= dout[o++] * freq * s;
        const T s2 = T(2) * s * c;
        c = c * c - s * s;
        s = s2;
        freq *= T(2);
      }
    }
    din[i] += acc;
  }
}

template void positional_encode(std::span<const float>, const EncodingConfig&, std::span<float>);
template void positional_encode(std::span<const double>, const EncodingConfig&, std::span<double>);
template void positional_encode_backward(std::span<const float>, const EncodingConfig&, std::span<const float>,
                                         std::span<float>);
template void positional_encode_backward(std::span<const double>, const EncodingConfig&, std::span<const double>,
                                         std::span<double>);

}  // namespace ocnerf
