// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ocnerf/dataset.hpp"
#include "ocnerf/errors.hpp"
#include "ocnerf/image_io.hpp"
#include "ocnerf/synthetic.hpp"
#include "test_util.hpp"

namespace ocnerf {
namespace {

namespace fs = std::filesystem;

Primitive box(const Vec3& center, const Vec3& half, double density, const Vec3& albedo, int id) {
  Primitive p;
  p.shape = Shape::box;
  p.pose = RigidTransform::translate(center);
  p.size = half;
  p.density = density;
  p.albedo = albedo;
  p.instance_id = id;
  return p;
}

SyntheticScene unit_scene() {
  SyntheticScene s;
  s.bounds = Aabb{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
  s.background = Vec3(0.1, 0.2, 0.3);
  return s;
}

Ray axis_ray(double near, double far) {
  Ray r;
  r.origin = Vec3(0, 0, 3);
  r.direction = Vec3(0, 0, -1);
  r.near = near;
  r.far = far;
  return r;
}

TEST(AnalyticField, OutsideEverythingIsEmptyBackground) {
  SyntheticScene s = unit_scene();
  s.primitives.push_back(box(Vec3::Zero(), Vec3::Constant(0.2), 5.0, Vec3(1, 0, 0), 1));
  const FieldSample f = eval_analytic_field(s, Vec3(0.5, 0.5, 0.5));
  EXPECT_EQ(f.sigma, 0.0);
  EXPECT_EQ(f.color, s.background);
}

TEST(AnalyticField, InsideOnePrimitive) {
  SyntheticScene s = unit_scene();
  s.primitives.push_back(box(Vec3::Zero(), Vec3::Constant(0.2), 5.0, Vec3(1, 0.5, 0), 1));
  const FieldSample f = eval_analytic_field(s, Vec3(0.1, 0, 0));
  EXPECT_EQ(f.sigma, 5.0);
  EXPECT_EQ(f.color, Vec3(1, 0.5, 0));
}

TEST(AnalyticField, OverlapIsDensityWeightedMean) {
  SyntheticScene s = unit_scene();
  s.primitives.push_back(box(Vec3::Zero(), Vec3::Constant(0.3), 1.0, Vec3(1, 0, 0), 1));
  s.primitives.push_back(box(Vec3(0.1, 0, 0), Vec3::Constant(0.3), 3.0, Vec3(0, 0, 1), 2));
  const FieldSample f = eval_analytic_field(s, Vec3(0.05, 0, 0));
  EXPECT_EQ(f.sigma, 4.0);
  EXPECT_NEAR((f.color - Vec3(0.25, 0, 0.75)).norm(), 0.0, 1e-15);
}

TEST(Oracle, EmptySceneIsBackgroundAtFar) {
  const SyntheticScene s = unit_scene();
  const OraclePixel px = oracle_render_ray(s, axis_ray(2.0, 4.0), 1024);
  EXPECT_EQ(px.color, s.background);
  EXPECT_EQ(px.opacity, 0.0);
  EXPECT_EQ(px.depth, 4.0);
  EXPECT_EQ(px.instance, 0);
}

TEST(Oracle, OpaqueBoxFillingTheView) {
  SyntheticScene s = unit_scene();
  s.primitives.push_back(box(Vec3::Zero(), Vec3::Constant(1.0), 50.0, Vec3(0.2, 0.7, 0.4), 3));
  const CameraPose pose = look_at(Vec3(0, 0, 3), Vec3::Zero(), Vec3::UnitY(), Intrinsics{40, 4, 4, 8, 8});
  const OracleImage img = oracle_render_view(s, pose, 1024, scene_ray_bounds(s));
  for (std::size_t i = 0; i < img.mask.size(); ++i) {
    EXPECT_EQ(img.mask[i], 3);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(img.rgb[3 * i + c], s.primitives[0].albedo[c], 1e-12);
  }
}

TEST(Oracle, HomogeneousSlabMatchesBeerLambert) {
  SyntheticScene s = unit_scene();
  s.primitives.push_back(box(Vec3::Zero(), Vec3(0.9, 0.9, 0.5), 2.0, Vec3(1, 1, 1), 1));
  for (double near : {1.0, 1.0137}) {
    const OraclePixel px = oracle_render_ray(s, axis_ray(near, 5.0), 1024);
    EXPECT_NEAR(px.opacity, 1.0 - std::exp(-2.0), 1e-12);
  }
}

TEST(Oracle, QuadratureConverges) {
  SyntheticScene s = unit_scene();
  Primitive sphere;
  sphere.shape = Shape::sphere;
  sphere.size = Vec3::Constant(0.6);
  sphere.density = 10.0;
  sphere.albedo = Vec3(0.8, 0.3, 0.1);
  s.primitives.push_back(sphere);
  s.primitives.push_back(box(Vec3(0.3, 0.2, 0.1), Vec3::Constant(0.3), 4.0, Vec3(0.1, 0.9, 0.2), 2));
  const CameraPose pose = look_at(Vec3(1, 1.5, 2.5), Vec3::Zero(), Vec3::UnitY(), Intrinsics{12, 6, 6, 12, 12});
  const OracleImage a = oracle_render_view(s, pose, 1024, scene_ray_bounds(s));
  const OracleImage b = oracle_render_view(s, pose, 2048, scene_ray_bounds(s));
  for (std::size_t i = 0; i < a.rgb.size(); ++i) EXPECT_LT(std::abs(a.rgb[i] - b.rgb[i]), 1e-3);
  for (std::size_t i = 0; i < a.opacity.size(); ++i) {
    EXPECT_GE(a.opacity[i], 0.0);
    EXPECT_LE(a.opacity[i], 1.0);
    EXPECT_GE(a.depth[i], 0.0);
  }
}

TEST(Oracle, MaskMatchesExactFirstHitForOpaquePrimitives) {
  SyntheticScene s = unit_scene();
  s.primitives.push_back(box(Vec3(-0.3, 0, 0.2), Vec3::Constant(0.25), 60.0, Vec3(1, 0, 0), 1));
  s.primitives.push_back(box(Vec3(0.25, 0.1, -0.3), Vec3(0.2, 0.4, 0.3), 60.0, Vec3(0, 1, 0), 2));
  const CameraPose pose = look_at(Vec3(0.5, 0.8, 3), Vec3::Zero(), Vec3::UnitY(), Intrinsics{30, 12, 12, 24, 24});
  const RayBounds rb = scene_ray_bounds(s);
  const OracleImage img = oracle_render_view(s, pose, 2048, rb);
  int checked = 0;
  for (int row = 0; row < 24; ++row) {
    for (int col = 0; col < 24; ++col) {
      const Ray ray = camera_ray(pose, Pixel{row, col}, rb);
      int first = 0;
      double best = ray.far;
      bool ambiguous = false;
      for (const auto& p : s.primitives) {
        const auto hit = p.intersect(ray.origin, ray.direction);
        if (!hit) continue;
        const double tau = p.density * (hit->second - hit->first);
        // Chords too thin to be clearly opaque or clearly empty.
        if (tau > 0.01 && tau < 5.0) ambiguous = true;
        if (tau >= 5.0 && hit->first < best) {
          best = hit->first;
          first = p.instance_id;
        }
      }
      if (ambiguous) continue;
      ++checked;
      EXPECT_EQ(img.mask[static_cast<std::size_t>(row * 24 + col)], first) << row << "," << col;
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(Oracle, RejectsFewSamplesAndBadPose) {
  const SyntheticScene s = unit_scene();
  CameraPose pose = look_at(Vec3(0, 0, 3), Vec3::Zero(), Vec3::UnitY(), Intrinsics{4, 2, 2, 4, 4});
  const auto dir = testing::scratch_dir();
  EXPECT_THROW(generate_synthetic_scene(s, std::vector<CameraPose>{pose}, 512, dir), InputError);
  pose.rotation(1, 1) = 3.0;
  EXPECT_THROW(generate_synthetic_scene(s, std::vector<CameraPose>{pose}, 1024, dir), InputError);
}

TEST(Dataset, RoundTripsBitExactly) {
  SyntheticScene s = preset_scene("two-box-occlusion");
  const auto poses = preset_rig("two-box-occlusion", 3, 16);
  const auto dir = testing::scratch_dir();
  generate_synthetic_scene(s, poses, 1024, dir);
  const Dataset ds = load_dataset(dir);
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.object_count(), 2);
  ASSERT_TRUE(ds.depths.has_value());
  ASSERT_TRUE(ds.scene.has_value());
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LE((ds.poses[i].rotation - poses[i].rotation).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((ds.poses[i].translation - poses[i].translation).cwiseAbs().maxCoeff(), 1e-12);
  }
  const auto dir2 = dir / "copy";
  save_dataset(ds, dir2);
  const Dataset again = load_dataset(dir2);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(again.images[i].data, ds.images[i].data);
    EXPECT_EQ(again.masks[i].labels, ds.masks[i].labels);
    EXPECT_EQ((*again.depths)[i], (*ds.depths)[i]);
    EXPECT_EQ(again.poses[i].rotation, ds.poses[i].rotation);
    EXPECT_EQ(again.poses[i].translation, ds.poses[i].translation);
  }
}

TEST(Dataset, ObjectCountIsMaxId) {
  Dataset ds;
  ds.poses.resize(2);
  ds.masks.push_back(InstanceMask{2, 1, {0, 3}});
  ds.masks.push_back(InstanceMask{2, 1, {1, 2}});
  EXPECT_EQ(ds.object_count(), 3);
}

TEST(Dataset, MissingPosesFileIsLoadError) {
  const auto dir = testing::scratch_dir();
  generate_synthetic_scene(preset_scene("one-sphere"), preset_rig("one-sphere", 2, 8), 1024, dir);
  fs::remove(dir / "poses.json");
  try {
    load_dataset(dir);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("poses.json"), std::string::npos);
  }
}

TEST(Dataset, MaskResolutionMismatchIsValidationError) {
  const auto dir = testing::scratch_dir();
  generate_synthetic_scene(preset_scene("one-sphere"), preset_rig("one-sphere", 2, 8), 1024, dir);
  write_png(dir / "mask" / (view_stem(1) + ".png"), PngImage{4, 4, 1, std::vector<std::uint8_t>(16, 0)});
  EXPECT_THROW(load_dataset(dir), ValidationError);
}

TEST(Dataset, GarbledPngIsLoadError) {
  const auto dir = testing::scratch_dir();
  generate_synthetic_scene(preset_scene("one-sphere"), preset_rig("one-sphere", 2, 8), 1024, dir);
  std::ofstream(dir / "rgb" / (view_stem(0) + ".png")) << "not a png";
  EXPECT_THROW(load_dataset(dir), LoadError);
}

}  // namespace
}  // namespace ocnerf
