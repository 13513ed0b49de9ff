// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ocnerf/edit.hpp"
#include "ocnerf/errors.hpp"
#include "ocnerf/metrics.hpp"
#include "ocnerf/render.hpp"
#include "ocnerf/rng.hpp"
#include "ocnerf/synthetic.hpp"

namespace ocnerf {
namespace {

NetworkConfig small_net() {
  NetworkConfig c;
  c.grid_resolution = 6;
  c.scene_feature_dim = 2;
  c.object_feature_dim = 2;
  c.scene_depth = 2;
  c.scene_width = 16;
  c.object_depth = 2;
  c.object_width = 16;
  c.color_width = 8;
  c.code_dim = 4;
  c.object_count = 2;
  c.grid_init_scale = 0.5;
  c.code_init_scale = 0.5;
  c.density_bias_init = 0.5;
  return c;
}

const FieldNetwork<float>& net() {
  static const FieldNetwork<float> n = FieldNetwork<float>::init(small_net(), 21);
  return n;
}

Ray x_ray() {
  Ray r;
  r.origin = Vec3(-3, 0.1, 0.05);
  r.direction = Vec3(1, 0, 0);
  r.near = 2.0;
  r.far = 4.0;
  return r;
}

RigidTransform rotation_about(const Vec3& axis, double angle, const Vec3& t) {
  return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), t};
}

std::vector<std::optional<Aabb>> bounds() {
  return {Aabb{Vec3(-0.6, -0.3, -0.3), Vec3(-0.1, 0.3, 0.3)}, Aabb{Vec3(0.2, -0.3, -0.3), Vec3(0.6, 0.3, 0.3)}};
}

TEST(EditScript, EmptyScriptEqualsPlainSceneRender) {
  RenderConfig rc;
  rc.samples = 24;
  rc.background = Vec3(0.1, 0.2, 0.3);
  const CameraPose pose = look_at(Vec3(0, 0.5, 3), Vec3::Zero(), Vec3::UnitY(), Intrinsics{8, 4, 4, 8, 8});
  const auto img = render_view(net(), bounds(), pose, EditScript{}, rc);
  const auto plain = render_branch_view(net(), BranchKind::scene, 0, pose, rc);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) EXPECT_NEAR(img.rgb[i], plain.rgb[i], 1e-6);
}

TEST(BackgroundStage, RemovalBoxOverWholeRayIsEmpty) {
  const Ray r = x_ray();
  const SampleSet s = stratified_sample(r, 32, false, 0);
  const std::vector<Aabb> regions{Aabb{Vec3::Constant(-2), Vec3::Constant(2)}};
  const SourceStream st = background_stage(net(), r, s, regions);
  const Vec3 bg(0.3, 0.4, 0.5);
  const auto out = compose(r, std::vector<SourceStream>{st}, bg);
  EXPECT_EQ(out.opacity, 0.0);
  EXPECT_EQ(out.color, bg);
}

TEST(BackgroundStage, RemovingAPrimitiveMatchesOracleWithoutIt) {
  // Analytic stand-in: zeroing the analytic field inside a box equals the scene without that primitive.
  const SyntheticScene scene = preset_scene("two-box-occlusion");
  const SyntheticScene rest = scene.only(2);
  const Aabb box = *scene.instance_bounds(1);
  const CameraPose pose = look_at(Vec3(0.5, 1.0, 3), Vec3::Zero(), Vec3::UnitY(), preset_intrinsics(16));
  const RayBounds rb = scene_ray_bounds(scene);
  const OracleImage expected = oracle_render_view(rest, pose, 1024, rb);
  const AnalyticField removed = [&](const Vec3& x) {
    return box.contains(x) ? FieldSample{0.0, scene.background} : eval_analytic_field(scene, x);
  };
  double worst = 0.0;
  const auto rays = view_rays(pose, rb);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    std::vector<double> t;
    for (int j = 0; j < 1024; ++j) t.push_back(rays[i].near + j * (rays[i].far - rays[i].near) / 1024);
    const auto r = render_samples(removed, SampleSet::from_distances(rays[i], t), scene.background);
    for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(r.color[c] - expected.rgb[3 * i + c]));
  }
  EXPECT_LT(worst, 0.05);
}

TEST(ObjectStage, IdentityEqualsObjectBranchRender) {
  const Ray r = x_ray();
  const SampleSet s = stratified_sample(r, 32, true, 4);
  const SourceStream st = object_stage(net(), r, s, 2, RigidTransform{});
  const auto composed = compose(r, std::vector<SourceStream>{st}, Vec3::Zero());
  const auto direct = render_samples<float>(net(), BranchKind::object, 2, r, s, Vec3::Zero());
  EXPECT_NEAR(composed.opacity, direct.opacity, 1e-6);
  EXPECT_NEAR((composed.color - direct.color.cast<double>()).norm(), 0.0, 1e-6);
}

TEST(ObjectStage, ComposedTransformEqualsSequentialMapping) {
  const RigidTransform t1 = rotation_about(Vec3(0, 1, 0), 0.4, Vec3(0.1, 0, 0));
  const RigidTransform t2 = rotation_about(Vec3(1, 0, 1), -0.3, Vec3(0, 0.05, -0.1));
  const Ray r = x_ray();
  const SampleSet s = stratified_sample(r, 24, false, 0);
  const SourceStream a = object_stage(net(), r, s, 1, t2 * t1);
  // Inverse-map the ray by t2 first, then query with t1.
  const RigidTransform inv2 = t2.inverse();
  Ray mapped = r;
  mapped.origin = inv2.apply(r.origin);
  mapped.direction = inv2.apply_direction(r.direction);
  const SampleSet ms = SampleSet::from_distances(mapped, s.t);
  const SourceStream b = object_stage(net(), mapped, ms, 1, t1);
  for (std::size_t i = 0; i < a.sigma.size(); ++i) {
    EXPECT_NEAR(a.sigma[i], b.sigma[i], 1e-5 * std::max(1.0, std::abs(a.sigma[i])));
    EXPECT_NEAR((a.color[i] - b.color[i]).norm(), 0.0, 1e-5);
  }
}

TEST(ObjectStage, NonRigidTransformRejected) {
  RigidTransform bad;
  bad.rotation(0, 0) = 2.0;
  const Ray r = x_ray();
  EXPECT_THROW(object_stage(net(), r, stratified_sample(r, 4, false, 0), 1, bad), InputError);
}

TEST(ObjectStage, SupportLimitsDensity) {
  const Ray r = x_ray();
  const SampleSet s = stratified_sample(r, 64, false, 0);
  const Aabb support{Vec3(-0.2, -1, -1), Vec3(0.2, 1, 1)};
  const SourceStream st = object_stage(net(), r, s, 1, RigidTransform::translate(Vec3(0.5, 0, 0)), support);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.x[i].x() - 0.5;
    if (x < -0.2 || x > 0.2) EXPECT_EQ(st.sigma[i], 0.0);
  }
}

std::vector<SourceStream> random_streams(std::uint64_t seed, bool shared_grid) {
  CounterRng rng(seed);
  std::vector<SourceStream> out;
  const std::vector<double> grid{2.1, 2.3, 2.5, 2.7, 2.9, 3.1};
  for (int src = 0; src < 3; ++src) {
    SourceStream s;
    s.source = src;
    for (int i = 0; i < 6; ++i) {
      s.t.push_back(shared_grid ? grid[static_cast<std::size_t>(i)] : rng.uniform(2.0, 4.0));
      s.sigma.push_back(rng.uniform(0, 3));
      s.color.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
    }
    if (!shared_grid) std::sort(s.t.begin(), s.t.end());
    out.push_back(s);
  }
  return out;
}

TEST(Compose, MergeIsAscendingAndOrderInvariant) {
  for (bool shared : {true, false}) {
    auto streams = random_streams(3, shared);
    const auto merged = merge_streams(streams);
    ASSERT_EQ(merged.size(), 18u);
    for (std::size_t i = 1; i < merged.size(); ++i) {
      EXPECT_LE(merged[i - 1].t, merged[i].t);
      if (merged[i - 1].t == merged[i].t) EXPECT_LE(merged[i - 1].source, merged[i].source);
    }
    const auto a = compose(x_ray(), streams, Vec3(0.1, 0.1, 0.1));
    std::reverse(streams.begin(), streams.end());
    std::swap(streams[0], streams[1]);
    const auto b = compose(x_ray(), streams, Vec3(0.1, 0.1, 0.1));
    EXPECT_EQ(a.color, b.color);
    EXPECT_EQ(a.opacity, b.opacity);
  }
}

TEST(Compose, DisjointSupportsEqualUnionAndAlphaBlend) {
  const Ray r = x_ray();
  const SampleSet s = stratified_sample(r, 64, true, 8);
  SourceStream front{1, s.t, {}, {}};
  SourceStream back{2, s.t, {}, {}};
  std::vector<double> sigma;
  RgbBlock<double> color(3, 64);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool in_front = s.t[i] > 2.4 && s.t[i] < 2.8;
    const bool in_back = s.t[i] > 3.1 && s.t[i] < 3.6;
    front.sigma.push_back(in_front ? 3.0 : 0.0);
    front.color.emplace_back(0.9, 0.1, 0.1);
    back.sigma.push_back(in_back ? 5.0 : 0.0);
    back.color.emplace_back(0.1, 0.1, 0.9);
    sigma.push_back(front.sigma.back() + back.sigma.back());
    color.col(static_cast<Eigen::Index>(i)) = in_front ? front.color.back() : back.color.back();
  }
  const Vec3 bg(0.2, 0.2, 0.2);
  const auto merged = compose(r, std::vector<SourceStream>{back, front}, bg);
  const auto single = composite<double>(s, sigma, color, bg);
  EXPECT_NEAR((merged.color - single.color).norm(), 0.0, 1e-12);
  const auto f = compose(r, std::vector<SourceStream>{front}, Vec3::Zero());
  const auto b = compose(r, std::vector<SourceStream>{back}, Vec3::Zero());
  const Vec3 blended = f.color + (1 - f.opacity) * (b.color + (1 - b.opacity) * bg);
  EXPECT_NEAR((merged.color - blended).norm(), 0.0, 1e-12);
}

TEST(Compose, TiedSamplesShareOneInterval) {
  // Two sources at identical t both span the gap to far.
  Ray r = x_ray();
  SourceStream a{0, {2.5}, {1.0}, {Vec3(1, 0, 0)}};
  SourceStream b{1, {2.5}, {2.0}, {Vec3(0, 1, 0)}};
  const auto out = compose(r, std::vector<SourceStream>{a, b}, Vec3::Zero());
  EXPECT_NEAR(out.opacity, 1.0 - std::exp(-(1.0 + 2.0) * 1.5), 1e-12);
}

TEST(EditScript, ParseAndValidate) {
  const EditScript s = parse_edit_script(R"({"edits": [{"object": 2, "mode": "duplicate", "t": [0.1, 0, 0]},
      {"object": 1, "mode": "move", "R": [0,-1,0, 1,0,0, 0,0,1], "t": [0, 0, 0.2]}],
      "removal_boxes": [{"object": 1, "min": [-1,-1,-1], "max": [0,0,0]}]})");
  ASSERT_EQ(s.edits.size(), 2u);
  EXPECT_EQ(s.edits[0].mode, EditMode::duplicate);
  EXPECT_EQ(s.edits[1].transform.rotation(0, 1), -1.0);
  EXPECT_NO_THROW(s.validate(2));
  EXPECT_THROW(s.validate(1), InputError);
  const EditScript again = parse_edit_script(edit_script_to_json(s));
  EXPECT_EQ(again.edits[1].transform.translation, s.edits[1].transform.translation);
  EXPECT_THROW(parse_edit_script(R"({"edits": [{"object": 1, "R": [2,0,0, 0,1,0, 0,0,1]}]})").validate(1), InputError);
  EXPECT_THROW(parse_edit_script("{not json"), LoadError);
}

TEST(RemovalRegions, DefaultsAndExplicitBoxes) {
  const Aabb box{Vec3(0, 0, 0), Vec3(1, 2, 4)};
  const Aabb d = default_removal_box(box);
  EXPECT_NEAR((d.min - Vec3(-0.05, -0.1, -0.2)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((d.max - Vec3(1.05, 2.1, 4.2)).norm(), 0.0, 1e-15);
  EditScript s;
  s.edits.push_back(Edit{1, RigidTransform::translate(Vec3(1, 0, 0)), EditMode::move});
  s.edits.push_back(Edit{2, RigidTransform::translate(Vec3(1, 0, 0)), EditMode::duplicate});
  EXPECT_EQ(removal_regions(s, bounds()).size(), 1u);
  s.removal_boxes.push_back(RemovalBox{1, box});
  const auto regions = removal_regions(s, bounds());
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].max, box.max);
  std::vector<std::optional<Aabb>> unknown(2);
  EditScript remove;
  remove.edits.push_back(Edit{1, {}, EditMode::remove});
  EXPECT_THROW(removal_regions(remove, unknown), InputError);
}

TEST(RenderView, LocalityAndEditSweep) {
  RenderConfig rc;
  rc.samples = 32;
  const CameraPose pose = look_at(Vec3(0.3, 0.6, 3.2), Vec3::Zero(), Vec3::UnitY(), Intrinsics{14, 8, 8, 16, 16});
  EditScript s;
  s.edits.push_back(Edit{1, rotation_about(Vec3(0, 1, 0), std::numbers::pi / 2, Vec3(0, 0, 0.3)), EditMode::move});
  s.edits.push_back(Edit{2, RigidTransform::translate(Vec3(0, 0.35, 0)), EditMode::duplicate});
  const auto plain = render_view(net(), bounds(), pose, EditScript{}, rc);
  const auto edited = render_view(net(), bounds(), pose, s, rc);
  const auto rays = view_rays(pose, rc.ray_bounds);
  std::vector<Aabb> touched = removal_regions(s, bounds());
  for (const auto& e : s.edits) {
    const Aabb sup = default_removal_box(*bounds()[static_cast<std::size_t>(e.object - 1)]);
    // World box of the transformed support.
    Aabb w{Vec3::Constant(1e9), Vec3::Constant(-1e9)};
    for (int c = 0; c < 8; ++c) {
      const Vec3 corner((c & 1) ? sup.max.x() : sup.min.x(), (c & 2) ? sup.max.y() : sup.min.y(),
                        (c & 4) ? sup.max.z() : sup.min.z());
      const Vec3 p = e.transform.apply(corner);
      w.min = w.min.cwiseMin(p);
      w.max = w.max.cwiseMax(p);
    }
    touched.push_back(w);
  }
  std::size_t untouched = 0;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    bool hit = false;
    for (const auto& b : touched) {
      const auto h = b.intersect(rays[i].origin, rays[i].direction);
      hit = hit || (h && h->second >= rays[i].near && h->first <= rays[i].far);
    }
    for (int c = 0; c < 3; ++c) {
      EXPECT_GE(edited.rgb[3 * i + c], 0.0);
      EXPECT_LE(edited.rgb[3 * i + c], 1.0 + 1e-9);
    }
    EXPECT_GE(edited.opacity[i], 0.0);
    EXPECT_LE(edited.opacity[i], 1.0 + 1e-9);
    if (hit) continue;
    ++untouched;
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(edited.rgb[3 * i + c], plain.rgb[3 * i + c], 1e-6);
  }
  EXPECT_GT(untouched, 0u);
  const auto again = render_view(net(), bounds(), pose, s, rc);
  EXPECT_EQ(again.rgb, edited.rgb);
}

TEST(Metrics, PsnrMatchesIndependentMse) {
  CounterRng rng(9);
  std::vector<double> a(300), b(300);
  double sum = 0.0;
  for (std::size_t i = 0; i < 300; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
    sum += (a[i] - b[i]) * (a[i] - b[i]);
  }
  EXPECT_NEAR(psnr(a, b), -10.0 * std::log10(sum / 300), 1e-9);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_THROW(mse(a, std::vector<double>(3)), InputError);
}

TEST(Metrics, IouVariants) {
  const std::vector<std::uint8_t> m{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(iou(m, std::vector<std::uint8_t>{1, 0, 1, 0}), 1.0 / 3);
  EXPECT_DOUBLE_EQ(iou(std::vector<std::uint8_t>(4, 0), std::vector<std::uint8_t>(4, 0)), 1.0);
  EXPECT_DOUBLE_EQ(soft_iou(std::vector<double>{1, 0.5, 0.25, 0}, m), 1.5 / 2.25);
  EXPECT_DOUBLE_EQ(soft_iou(std::vector<double>{1, 1, 0, 0}, m), 1.0);
  const auto c = opacity_centroid(std::vector<double>{0, 1, 0, 1}, 2, 2);
  ASSERT_TRUE(c.has_value());
  EXPECT_DOUBLE_EQ((*c)(0), 1.5);
  EXPECT_DOUBLE_EQ((*c)(1), 1.0);
  EXPECT_FALSE(opacity_centroid(std::vector<double>(4, 0.0), 2, 2).has_value());
}

}  // namespace
}  // namespace ocnerf
