// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "ocnerf/composite.hpp"
#include "ocnerf/config.hpp"
#include "ocnerf/edit.hpp"
#include "ocnerf/encoding.hpp"
#include "ocnerf/field_network.hpp"
#include "ocnerf/ray_step.hpp"
#include "ocnerf/rng.hpp"
#include "ocnerf/sampling.hpp"

namespace {

using namespace ocnerf;

Ray bench_ray() {
  Ray r;
  r.origin = Vec3(0, 0.1, 3);
  r.direction = Vec3(0.05, 0, -1).normalized();
  r.near = 1.5;
  r.far = 4.5;
  return r;
}

NetworkConfig bench_network() {
  TrainConfig c = default_train_config();
  NetworkConfig n = c.network;
  n.object_count = 2;
  return n;
}

void BM_Composite(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SampleSet s = stratified_sample(bench_ray(), n, true, 1);
  CounterRng rng(2);
  std::vector<double> sigma(s.size());
  for (auto& v : sigma) v = rng.uniform(0, 5);
  const RgbBlock<double> color = RgbBlock<double>::Constant(3, n, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(composite<double>(s, sigma, color, Rgb<double>::Zero()));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Composite)->Arg(64)->Arg(256);

void BM_CompositeBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SampleSet s = stratified_sample(bench_ray(), n, true, 1);
  const std::vector<double> sigma(s.size(), 1.5);
  const RgbBlock<double> color = RgbBlock<double>::Constant(3, n, 0.5);
  const auto r = composite<double>(s, sigma, color, Rgb<double>::Zero());
  CompositeUpstream<double> up;
  up.dcolor = Rgb<double>(1, 1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(composite_backward<double>(s, sigma, color, Rgb<double>::Zero(), r, up));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_CompositeBackward)->Arg(64)->Arg(256);

void BM_PositionalEncode(benchmark::State& state) {
  const EncodingConfig cfg{static_cast<int>(state.range(0)), true};
  std::vector<float> in{0.1f, -0.4f, 0.7f};
  std::vector<float> out(static_cast<std::size_t>(cfg.output_dim(3)));
  for (auto _ : state) {
    positional_encode<float>(in, cfg, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_PositionalEncode)->Arg(4)->Arg(10);

void BM_ImportanceResample(benchmark::State& state) {
  const Ray r = bench_ray();
  const SampleSet base = stratified_sample(r, 48, true, 3);
  CounterRng rng(4);
  std::vector<double> w(base.size());
  for (auto& v : w) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(importance_resample(r, base, w, 32, 5));
}
BENCHMARK(BM_ImportanceResample);

void BM_BranchForward(benchmark::State& state) {
  const auto net = FieldNetwork<float>::init(bench_network(), 1);
  const auto kind = state.range(0) == 0 ? BranchKind::scene : BranchKind::object;
  const SampleSet s = stratified_sample(bench_ray(), 256, true, 1);
  const std::vector<Vec3> d(s.size(), bench_ray().direction);
  const std::vector<int> ids(s.size(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(kind, s.x, d, ids, false));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_BranchForward)->Arg(0)->Arg(1);

void BM_TrainStep(benchmark::State& state) {
  const auto net = FieldNetwork<float>::init(bench_network(), 1);
  const int batch = static_cast<int>(state.range(0));
  std::vector<TrainRay> rays;
  CounterRng rng(6);
  for (int i = 0; i < batch; ++i) {
    TrainRay t;
    t.ray = bench_ray();
    t.ray.direction = Vec3(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), -1).normalized();
    t.object = 1 + i % 2;
    t.mask = i % 3 == 0;
    t.color = Vec3(0.5, 0.4, 0.3);
    rays.push_back(t);
  }
  const StepConfig cfg = default_train_config().step;
  auto grad = net.zero_grad();
  for (auto _ : state) {
    grad.set_zero();
    benchmark::DoNotOptimize(ray_step<float>(net, rays, cfg, 7, nullptr, &grad));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TrainStep)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Compose(benchmark::State& state) {
  CounterRng rng(8);
  std::vector<SourceStream> streams;
  for (int src = 0; src < 3; ++src) {
    SourceStream s;
    s.source = src;
    for (int i = 0; i < 96; ++i) {
      s.t.push_back(1.5 + 3.0 * (i + rng.uniform()) / 96);
      s.sigma.push_back(rng.uniform(0, 4));
      s.color.emplace_back(0.5, 0.5, 0.5);
    }
    streams.push_back(s);
  }
  for (auto _ : state) benchmark::DoNotOptimize(compose(bench_ray(), streams, Vec3::Zero()));
}
BENCHMARK(BM_Compose);

}  // namespace

BENCHMARK_MAIN();
