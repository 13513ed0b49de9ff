// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace ocnerf {

struct EncodingConfig {
  int frequencies = 0;
  bool include_identity = true;

  int output_dim(int input_dim) const { return input_dim * ((include_identity ? 1 : 0) + 2 * frequencies); }
};

/// Frequency encoding. For each input component v the output block is
///   [v (if identity), sin(2^0 pi v), cos(2^0 pi v), ..., sin(2^{L-1} pi v), cos(2^{L-1} pi v)]
/// and blocks follow input order. `out` must have cfg.output_dim(in.size())
/// entries. Throws NumericError for non-finite input.
template <class T>
void positional_encode(std::span<const T> in, const EncodingConfig& cfg, std::span<T> out);

template <class T>
std::vector<T> positional_encode(std::span<const T> in, const EncodingConfig& cfg) {
  std::vector<T> out(static_cast<std::size_t>(cfg.output_dim(static_cast<int>(in.size()))));
  positional_encode(in, cfg, std::span<T>(out));
  return out;
}

/// Accumulates d(loss)/d(in) given d(loss)/d(out).
template <class T>
void positional_encode_backward(std::span<const T> in, const EncodingConfig& cfg, std::span<const T> dout,
                                std::span<T> din);

}  // namespace ocnerf
