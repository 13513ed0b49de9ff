// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ocnerf/composite.hpp"
#include "ocnerf/errors.hpp"
#include "ocnerf/render.hpp"
#include "ocnerf/rng.hpp"
#include "ocnerf/sampling.hpp"
#include "ocnerf/synthetic.hpp"

namespace ocnerf {
namespace {

Ray z_ray(double near, double far) {
  Ray r;
  r.origin = Vec3::Zero();
  r.direction = Vec3(0, 0, 1);
  r.near = near;
  r.far = far;
  return r;
}

RgbBlock<double> gray(std::size_t n, double v = 0.5) { return RgbBlock<double>::Constant(3, static_cast<Eigen::Index>(n), v); }

TEST(StratifiedSample, MidpointsWithoutJitter) {
  const SampleSet s = stratified_sample(z_ray(0, 4), 4, false, 0);
  EXPECT_EQ(s.t, (std::vector<double>{0.5, 1.5, 2.5, 3.5}));
  EXPECT_NEAR((s.x[2] - Vec3(0, 0, 2.5)).norm(), 0.0, 1e-15);
}

TEST(StratifiedSample, JitterIsSeededAndStaysInBins) {
  const Ray r = z_ray(1, 3);
  const SampleSet a = stratified_sample(r, 32, true, 99);
  const SampleSet b = stratified_sample(r, 32, true, 99);
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(a.delta, b.delta);
  EXPECT_NE(a.t, stratified_sample(r, 32, true, 100).t);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_GE(a.t[i], 1 + 2.0 * i / 32);
    EXPECT_LE(a.t[i], 1 + 2.0 * (i + 1) / 32);
  }
  EXPECT_NO_THROW(a.validate());
}

TEST(Composite, EmptyIsBackground) {
  const SampleSet s = stratified_sample(z_ray(0, 1), 8, false, 0);
  const std::vector<double> sigma(8, 0.0);
  const Rgb<double> bg(0.1, 0.2, 0.3);
  const auto r = composite<double>(s, sigma, gray(8), bg);
  EXPECT_EQ(r.opacity, 0.0);
  EXPECT_EQ(r.color, bg);
  EXPECT_EQ(r.terminal_depth, 1.0);
}

TEST(Composite, OpaqueFrontSample) {
  const SampleSet s = SampleSet::from_distances(z_ray(0, 2), {0.5, 1.0, 1.5});
  std::vector<double> sigma{20.0 / s.delta[0], 3.0, 3.0};
  sigma[0] = 40.0 / s.delta[0];
  RgbBlock<double> c(3, 3);
  c << 0.9, 0.1, 0.1, 0.2, 0.8, 0.1, 0.3, 0.3, 0.7;
  const auto r = composite<double>(s, sigma, c, Rgb<double>::Zero());
  EXPECT_NEAR(r.opacity, 1.0, 1e-8);
  EXPECT_NEAR((r.color - c.col(0)).norm(), 0.0, 1e-8);
  EXPECT_NEAR(r.depth, 0.5, 1e-8);
}

TEST(Composite, HomogeneousSegmentClosedForm) {
  const double expected = 1.0 - std::exp(-2.0);
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(i / 10.0);
  const SampleSet s = SampleSet::from_distances(z_ray(0, 1), t);
  const auto r = composite<double>(s, std::vector<double>(10, 2.0), gray(10), Rgb<double>::Zero());
  EXPECT_NEAR(r.opacity, expected, 1e-14);
  // Riemann cross-check with 4096 bins.
  double riemann = 0.0;
  double trans = 1.0;
  for (int i = 0; i < 4096; ++i) {
    riemann += trans * 2.0 / 4096;
    trans *= std::exp(-2.0 / 4096);
  }
  EXPECT_NEAR(r.opacity, riemann, 5e-4);
}

TEST(Composite, InvalidInputs) {
  const SampleSet s = stratified_sample(z_ray(0, 1), 4, false, 0);
  EXPECT_THROW(composite<double>(s, std::vector<double>{1, -1, 1, 1}, gray(4), Rgb<double>::Zero()), InputError);
  EXPECT_THROW(composite<double>(s, std::vector<double>{1, std::nan(""), 1, 1}, gray(4), Rgb<double>::Zero()),
               NumericError);
  EXPECT_THROW(composite<double>(s, std::vector<double>{1, 1, 1}, gray(4), Rgb<double>::Zero()), InputError);
}

TEST(Composite, WeightsTelescope) {
  CounterRng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const SampleSet s = stratified_sample(z_ray(0, 3), 24, true, static_cast<std::uint64_t>(trial));
    std::vector<double> sigma(24);
    double tau = 0.0;
    for (std::size_t i = 0; i < 24; ++i) {
      sigma[i] = rng.uniform(0, 4);
      tau += sigma[i] * s.delta[i];
    }
    const auto r = composite<double>(s, sigma, gray(24), Rgb<double>::Zero());
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    EXPECT_NEAR(sum, 1.0 - std::exp(-tau), 1e-12);
    EXPECT_NEAR(r.opacity, sum, 1e-15);
  }
}

TEST(Composite, SplittingASampleKeepsOpacity) {
  const SampleSet a = SampleSet::from_distances(z_ray(0, 2), {0.0, 0.5, 1.0, 1.5});
  const SampleSet b = SampleSet::from_distances(z_ray(0, 2), {0.0, 0.5, 0.75, 1.0, 1.5});
  const auto ra = composite<double>(a, std::vector<double>{0.3, 1.7, 0.2, 2.5}, gray(4), Rgb<double>::Zero());
  const auto rb = composite<double>(b, std::vector<double>{0.3, 1.7, 1.7, 0.2, 2.5}, gray(5), Rgb<double>::Zero());
  EXPECT_NEAR(ra.opacity, rb.opacity, 1e-15);
}

TEST(Composite, OpacityMonotoneInSigma) {
  CounterRng rng(2);
  const SampleSet s = stratified_sample(z_ray(0, 2), 12, true, 5);
  std::vector<double> sigma(12);
  for (auto& v : sigma) v = rng.uniform(0, 2);
  const double base = composite<double>(s, sigma, gray(12), Rgb<double>::Zero()).opacity;
  for (std::size_t i = 0; i < 12; ++i) {
    auto more = sigma;
    more[i] += 0.5;
    EXPECT_GE(composite<double>(s, more, gray(12), Rgb<double>::Zero()).opacity, base);
  }
}

TEST(Composite, BackwardMatchesFiniteDifferences) {
  CounterRng rng(3);
  const SampleSet s = stratified_sample(z_ray(0.5, 2.5), 16, true, 7);
  std::vector<double> sigma(16);
  RgbBlock<double> color(3, 16);
  for (std::size_t i = 0; i < 16; ++i) {
    sigma[i] = rng.uniform(0, 3);
    for (int c = 0; c < 3; ++c) color(c, static_cast<Eigen::Index>(i)) = rng.uniform();
  }
  const Rgb<double> bg(0.3, 0.6, 0.1);
  CompositeUpstream<double> up;
  up.dcolor = Rgb<double>(0.7, -0.2, 0.4);
  up.dopacity = -0.3;
  up.ddepth = 0.25;
  up.dterminal_depth = 0.15;
  auto loss = [&](const std::vector<double>& sg, const RgbBlock<double>& cl) {
    const auto r = composite<double>(s, sg, cl, bg);
    return up.dcolor.dot(r.color) + up.dopacity * r.opacity + up.ddepth * r.depth + up.dterminal_depth * r.terminal_depth;
  };
  const auto r = composite<double>(s, sigma, color, bg);
  const auto g = composite_backward<double>(s, sigma, color, bg, r, up);
  const double h = 1e-6;
  for (std::size_t i = 0; i < 16; ++i) {
    auto p = sigma, m = sigma;
    p[i] += h;
    m[i] -= h;
    const double fd = (loss(p, color) - loss(m, color)) / (2 * h);
    EXPECT_NEAR(g.dsigma[i], fd, 1e-4 * std::max(std::abs(fd), 1e-6));
    for (int c = 0; c < 3; ++c) {
      RgbBlock<double> cp = color, cm = color;
      cp(c, static_cast<Eigen::Index>(i)) += h;
      cm(c, static_cast<Eigen::Index>(i)) -= h;
      const double fdc = (loss(sigma, cp) - loss(sigma, cm)) / (2 * h);
      EXPECT_NEAR(g.dcolor(c, static_cast<Eigen::Index>(i)), fdc, 1e-4 * std::max(std::abs(fdc), 1e-6));
    }
  }
}

TEST(Composite, PrunedSamplesAreTransparentAndGetNoGradient) {
  SampleSet s = stratified_sample(z_ray(0, 2), 8, false, 0);
  const std::vector<double> sigma(8, 1.5);
  s.keep = {1, 1, 1, 0, 0, 1, 0, 1};
  SampleSet dense = s;
  std::vector<double> zeroed = sigma;
  for (std::size_t i = 0; i < 8; ++i)
    if (!s.keep[i]) zeroed[i] = 0.0;
  dense.keep.assign(8, 1);
  const auto r = composite<double>(s, sigma, gray(8), Rgb<double>::Zero());
  const auto z = composite<double>(dense, zeroed, gray(8), Rgb<double>::Zero());
  EXPECT_EQ(r.opacity, z.opacity);
  CompositeUpstream<double> up;
  up.dcolor = Rgb<double>(1, 1, 1);
  up.dopacity = 1.0;
  const auto g = composite_backward<double>(s, sigma, gray(8), Rgb<double>::Zero(), r, up);
  for (std::size_t i = 0; i < 8; ++i)
    if (!s.keep[i]) {
      EXPECT_EQ(g.dsigma[i], 0.0);
      EXPECT_TRUE(g.dcolor.col(static_cast<Eigen::Index>(i)).isZero(0.0));
    }
}

TEST(ImportanceResample, ConcentratesOnHeavyBin) {
  const Ray r = z_ray(0, 1);
  const SampleSet base = stratified_sample(r, 16, false, 0);
  std::vector<double> w(16, 0.0);
  w[5] = 1.0;
  const SampleSet out = importance_resample(r, base, w, 200, 4, 0.0);
  ASSERT_EQ(out.size(), 216u);
  const auto edges = sample_bin_edges(base);
  int inside = 0;
  for (double t : out.t) inside += t >= edges[5] && t <= edges[6];
  EXPECT_GE(inside - 1, static_cast<int>(0.9 * 200));
}

TEST(ImportanceResample, UniformWeightsGiveUniformDraws) {
  const Ray r = z_ray(0, 1);
  const SampleSet base = stratified_sample(r, 64, false, 0);
  const std::vector<double> w(64, 0.3);
  const SampleSet out = importance_resample(r, base, w, 10000, 8, 0.0);
  std::vector<double> drawn;
  std::vector<double> original = base.t;
  for (double t : out.t) {
    auto it = std::find(original.begin(), original.end(), t);
    if (it != original.end()) {
      original.erase(it);
    } else {
      drawn.push_back(t);
    }
  }
  ASSERT_EQ(drawn.size(), 10000u);
  std::sort(drawn.begin(), drawn.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < drawn.size(); ++i)
    ks = std::max({ks, std::abs(drawn[i] - double(i) / drawn.size()), std::abs(drawn[i] - double(i + 1) / drawn.size())});
  EXPECT_LT(ks, 0.1);
}

TEST(ImportanceResample, MergedIsStrictlyAscendingAndAllZeroFallsBack) {
  const Ray r = z_ray(2, 6);
  const SampleSet base = stratified_sample(r, 24, true, 3);
  CounterRng rng(4);
  std::vector<double> w(24);
  for (auto& v : w) v = rng.uniform();
  for (const auto& weights : {w, std::vector<double>(24, 0.0)}) {
    const SampleSet out = importance_resample(r, base, weights, 40, 6, 0.0);
    ASSERT_EQ(out.size(), 64u);
    for (std::size_t i = 1; i < out.size(); ++i) EXPECT_LT(out.t[i - 1], out.t[i]);
    EXPECT_NO_THROW(out.validate());
  }
}

TEST(RenderRay, ZeroDensityLayerGivesLowUniformOpacity) {
  NetworkConfig c;
  c.grid_resolution = 4;
  c.scene_feature_dim = 2;
  c.object_feature_dim = 2;
  c.scene_depth = 2;
  c.scene_width = 16;
  c.object_depth = 2;
  c.object_width = 16;
  c.color_width = 8;
  c.code_dim = 4;
  c.density_bias_init = -6.0;
  auto net = FieldNetwork<double>::init(c, 1);
  net.scene_branch().density().weight.setZero();
  RenderConfig rc;
  rc.samples = 32;
  const CameraPose pose = look_at(Vec3(0, 0, 3), Vec3::Zero(), Vec3::UnitY(), Intrinsics{8, 2, 2, 4, 4});
  const auto rays = view_rays(pose, rc.ray_bounds);
  const auto out = render_rays<double>(net, BranchKind::scene, 0, rays, rc);
  for (const auto& r : out) {
    EXPECT_LT(r.opacity, 0.02);
    EXPECT_NEAR(r.opacity, out[0].opacity, 0.01);
  }
}

TEST(RenderRay, AnalyticFieldReproducesOracle) {
  const SyntheticScene scene = preset_scene("two-box-occlusion");
  const CameraPose pose = look_at(Vec3(2.5, 1.0, 1.5), Vec3::Zero(), Vec3::UnitY(), preset_intrinsics(16));
  const RayBounds rb = scene_ray_bounds(scene);
  const OracleImage img = oracle_render_view(scene, pose, 1024, rb);
  const AnalyticField field = [&](const Vec3& x) { return eval_analytic_field(scene, x); };
  double worst = 0.0;
  const auto rays = view_rays(pose, rb);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    std::vector<double> t;
    for (int j = 0; j < 65536; ++j) t.push_back(rays[i].near + (j + 0.5) * (rays[i].far - rays[i].near) / 65536);
    const auto r = render_samples(field, SampleSet::from_distances(rays[i], t), scene.background);
    for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(r.color[c] - img.rgb[3 * i + c]));
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(RenderRay, RepeatCallsAreBitwiseIdentical) {
  NetworkConfig c;
  c.grid_resolution = 4;
  c.scene_feature_dim = 2;
  c.object_feature_dim = 2;
  c.scene_depth = 2;
  c.scene_width = 16;
  c.object_depth = 2;
  c.object_width = 16;
  c.color_width = 8;
  c.code_dim = 4;
  const auto net = FieldNetwork<float>::init(c, 2);
  RenderConfig rc;
  rc.jitter = true;
  rc.seed = 5;
  const Ray ray = camera_ray(look_at(Vec3(0, 0, 3), Vec3::Zero(), Vec3::UnitY(), Intrinsics{8, 2, 2, 4, 4}), Pixel{1, 2},
                             rc.ray_bounds);
  const auto a = render_ray<float>(net, BranchKind::object, 1, ray, rc);
  const auto b = render_ray<float>(net, BranchKind::object, 1, ray, rc);
  EXPECT_EQ(a.color, b.color);
  EXPECT_EQ(a.opacity, b.opacity);
  EXPECT_EQ(a.weights, b.weights);
}

}  // namespace
}  // namespace ocnerf
