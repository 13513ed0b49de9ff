// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ocnerf/errors.hpp"
#include "ocnerf/rng.hpp"

namespace ocnerf {

std::size_t SampleSet::kept() const {
  return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), std::uint8_t{1}));
}

SampleSet SampleSet::from_distances(const Ray& ray, std::vector<double> t) {
  SampleSet s;
  s.near = ray.near;
  s.far = ray.far;
  s.t = std::move(t);
  const std::size_t n = s.t.size();
  s.delta.resize(n);
  s.x.resize(n);
  s.keep.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? s.t[i + 1] : s.far;
    s.delta[i] = next - s.t[i];
    s.x[i] = ray.at(s.t[i]);
  }
  return s;
}

void SampleSet::validate() const {
  if (delta.size() != t.size() || x.size() != t.size() || keep.size() != t.size())
    throw InputError("sample set arrays differ in length");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < near || t[i] > far) throw InputError("sample outside [near, far]");
    if (i > 0 && !(t[i] > t[i - 1])) throw InputError("sample distances not strictly ascending");
    if (!(delta[i] > 0.0)) throw InputError("sample spacing must be positive");
  }
}

SampleSet stratified_sample(const Ray& ray, int n, bool jitter, std::uint64_t seed) {
  if (n <= 0) throw InputError("stratified_sample needs at least one sample");
  const double width = (ray.far - ray.near) / n;
  std::vector<double> t(static_cast<std::size_t>(n));
  CounterRng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double u = jitter ? rng.uniform() : 0.5;
    t[static_cast<std::size_t>(i)] = ray.near + (i + u) * width;
  }
  return SampleSet::from_distances(ray, std::move(t));
}

std::vector<double> sample_bin_edges(const SampleSet& base) {
  const std::size_t n = base.size();
  std::vector<double> edges(n + 1);
  edges.front() = base.near;
  edges.back() = base.far;
  for (std::size_t i = 1; i < n; ++i) edges[i] = 0.5 * (base.t[i - 1] + base.t[i]);
  return edges;
}

SampleSet importance_resample(const Ray& ray, const SampleSet& base, std::span<const double> weights,
                              int n_importance, std::uint64_t seed, double floor) {
  if (weights.size() != base.size()) throw InputError("importance weights do not match samples");
  if (n_importance < 0) throw InputError("negative importance sample count");
  if (base.size() == 0) throw InputError("importance_resample needs a non-empty base sample set");
  const std::size_t n = base.size();
  const std::vector<double> edges = sample_bin_edges(base);

  std::vector<double> cdf(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("importance weights must be finite and >= 0");
    cdf[i + 1] = cdf[i] + w + floor;
  }
  const bool uniform = !(cdf[n] > 0.0);
  if (uniform) {
    for (std::size_t i = 0; i <= n; ++i) cdf[i] = edges[i] - edges[0];
  }
  const double total = cdf[n];

  std::vector<double> t = base.t;
  t.reserve(n + static_cast<std::size_t>(n_importance));
  CounterRng rng(seed);
  for (int j = 0; j < n_importance; ++j) {
    // Jittered-stratified uniforms keep the draws well spread.
    const double u = (j + rng.uniform()) / n_importance * total;
    auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), u);
    std::size_t bin = static_cast<std::size_t>(std::distance(cdf.begin() + 1, it));
    bin = std::min(bin, n - 1);
    const double mass = cdf[bin + 1] - cdf[bin];
    const double frac = mass > 0.0 ? (u - cdf[bin]) / mass : 0.5;
    t.push_back(edges[bin] + std::clamp(frac, 0.0, 1.0) * (edges[bin + 1] - edges[bin]));
  }
  std::sort(t.begin(), t.end());
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) t[i] = std::nextafter(t[i - 1], ray.far + 1.0);
  }
  // Nudged values could pass `far`; pull the tail back strictly inside.
  for (std::size_t i = t.size(); i-- > 0;) {
    const double cap = i + 1 < t.size() ? std::nextafter(t[i + 1], ray.near - 1.0)
                                        : std::nextafter(ray.far, ray.near - 1.0);
    if (t[i] > cap) t[i] = cap;
  }
  return SampleSet::from_distances(ray, std::move(t));
}

}  // namespace ocnerf
