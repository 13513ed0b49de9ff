// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "ocnerf/composite.hpp"
#include "ocnerf/errors.hpp"
#include "ocnerf/field_network.hpp"
#include "ocnerf/render.hpp"
#include "ocnerf/rng.hpp"

namespace ocnerf {
namespace {

NetworkConfig tiny(int k = 2) {
  NetworkConfig c;
  c.grid_resolution = 3;
  c.scene_feature_dim = 2;
  c.object_feature_dim = 2;
  c.scene_depth = 2;
  c.scene_width = 16;
  c.object_depth = 2;
  c.object_width = 16;
  c.color_width = 8;
  c.code_dim = 4;
  c.object_count = k;
  c.grid_init_scale = 0.5;
  c.code_init_scale = 0.5;
  c.embedding.xyz = {2, true};
  c.embedding.dir = {1, true};
  c.embedding.feature = {1, true};
  return c;
}

std::vector<Vec3> points(int n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<Vec3> x;
  for (int i = 0; i < n; ++i) x.emplace_back(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9));
  return x;
}

std::vector<Vec3> directions(int n, std::uint64_t seed) {
  auto d = points(n, seed);
  for (auto& v : d) v.normalize();
  return d;
}

TEST(FieldNetwork, ZeroParametersGiveSoftplusZeroAndHalfGray) {
  FieldNetwork<double> net(tiny());
  const auto x = points(5, 1);
  const auto d = directions(5, 2);
  const std::vector<int> ids(5, 1);
  for (BranchKind kind : {BranchKind::scene, BranchKind::object}) {
    const auto e = net.forward(kind, x, d, ids);
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      EXPECT_NEAR(e.out.sigma(i), std::log(2.0), 1e-15);
      EXPECT_NEAR((e.out.color.col(i) - Vec3::Constant(0.5)).norm(), 0.0, 1e-15);
    }
  }
}

TEST(FieldNetwork, DensityIgnoresViewDirection) {
  const auto net = FieldNetwork<double>::init(tiny(), 3);
  const auto x = points(6, 3);
  const std::vector<int> ids{1, 2, 1, 2, 1, 2};
  for (BranchKind kind : {BranchKind::scene, BranchKind::object}) {
    const auto a = net.forward(kind, x, directions(6, 4), ids);
    const auto b = net.forward(kind, x, directions(6, 5), ids);
    EXPECT_EQ(a.out.sigma, b.out.sigma);
    EXPECT_NE(a.out.color, b.out.color);
  }
}

TEST(FieldNetwork, ScenePassMatchesStraightLineLayerAlgebra) {
  const auto net = FieldNetwork<double>::init(tiny(), 4);
  const auto x = points(4, 6);
  const auto d = directions(4, 7);
  const auto e = net.forward(BranchKind::scene, x, d);
  const Branch<double>& b = net.scene_branch();
  const EmbeddingConfig& emb = net.config().embedding;
  for (std::size_t p = 0; p < x.size(); ++p) {
    const auto h = hybrid_embed<double>(x[p], d[p], net.grid(), emb);
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(h.space.data(), static_cast<Eigen::Index>(h.space.size()));
    for (const auto& layer : b.trunk()) a = (layer.weight * a + layer.bias).cwiseMax(0.0);
    const double pre = (b.density().weight * a + b.density().bias)(0);
    const double sigma = pre > 20 ? pre : std::log1p(std::exp(pre));
    Eigen::VectorXd cin(a.size() + static_cast<Eigen::Index>(h.dir.size()));
    cin << a, Eigen::Map<const Eigen::VectorXd>(h.dir.data(), static_cast<Eigen::Index>(h.dir.size()));
    const Eigen::VectorXd hid = (b.color_hidden().weight * cin + b.color_hidden().bias).cwiseMax(0.0);
    const Eigen::VectorXd logits = b.color_out().weight * hid + b.color_out().bias;
    const Eigen::Index i = static_cast<Eigen::Index>(p);
    EXPECT_NEAR(e.out.sigma(i), sigma, 1e-13);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(e.out.color(c, i), 1.0 / (1.0 + std::exp(-logits(c))), 1e-13);
  }
}

TEST(FieldNetwork, CodesReachTheOutputAndRepeatDeterministically) {
  const auto net = FieldNetwork<double>::init(tiny(), 5);
  const std::vector<Vec3> x(2, Vec3(0.1, 0.2, -0.3));
  const std::vector<Vec3> d(2, Vec3(0, 0, 1));
  const auto e = net.forward(BranchKind::object, x, d, std::vector<int>{1, 2});
  EXPECT_NE(e.out.sigma(0), e.out.sigma(1));
  const auto again = net.forward(BranchKind::object, x, d, std::vector<int>{1, 2});
  EXPECT_EQ(e.out.sigma, again.out.sigma);
  EXPECT_EQ(e.out.color, again.out.color);
}

TEST(FieldNetwork, OutputRangeOnRandomInputs) {
  const auto net = FieldNetwork<double>::init(tiny(3), 6);
  const auto x = points(300, 8);
  const auto d = directions(300, 9);
  std::vector<int> ids;
  for (int i = 0; i < 300; ++i) ids.push_back(1 + i % 3);
  for (BranchKind kind : {BranchKind::scene, BranchKind::object}) {
    const auto e = net.forward(kind, x, d, ids);
    EXPECT_GE(e.out.sigma.minCoeff(), 0.0);
    EXPECT_GE(e.out.color.minCoeff(), 0.0);
    EXPECT_LE(e.out.color.maxCoeff(), 1.0);
  }
}

// Loss sum_i a_i sigma_i + b_i . color_i; its gradient must match central differences.
void audit_branch(BranchKind kind, double tol) {
  auto net = FieldNetwork<double>::init(tiny(), 7);
  const auto x = points(3, 10);
  const auto d = directions(3, 11);
  const std::vector<int> ids{2, 1, 2};
  CounterRng rng(12);
  Eigen::Matrix<double, 1, Eigen::Dynamic> a(1, 3);
  Eigen::Matrix<double, 3, Eigen::Dynamic> b(3, 3);
  for (int i = 0; i < 3; ++i) {
    a(i) = rng.uniform(-1, 1);
    for (int c = 0; c < 3; ++c) b(c, i) = rng.uniform(-1, 1);
  }
  auto grad = net.zero_grad();
  net.backward(net.forward(kind, x, d, ids), a, b, grad);
  std::vector<std::vector<double>> analytic;
  grad.visit([&](const std::string&, std::span<double> v, const auto&) { analytic.emplace_back(v.begin(), v.end()); });
  auto loss = [&] {
    const auto e = net.forward(kind, x, d, ids, false);
    return (a.array() * e.out.sigma.array()).sum() + (b.array() * e.out.color.array()).sum();
  };
  std::size_t t = 0;
  std::size_t nonzero = 0;
  net.visit_parameters([&](const std::string& name, std::span<double> p, const auto&) {
    const auto& g = analytic[t++];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double keep = p[j];
      p[j] = keep + 1e-4;
      const double up = loss();
      p[j] = keep - 1e-4;
      const double down = loss();
      p[j] = keep;
      const double fd = (up - down) / 2e-4;
      nonzero += g[j] != 0.0;
      EXPECT_LE(std::abs(fd - g[j]), tol * std::max({std::abs(fd), std::abs(g[j]), 1e-3})) << name << "[" << j << "]";
    }
  });
  EXPECT_GT(nonzero, 0u);
}

TEST(FieldNetwork, SceneBackwardMatchesFiniteDifferences) { audit_branch(BranchKind::scene, 1e-4); }
TEST(FieldNetwork, ObjectBackwardMatchesFiniteDifferences) { audit_branch(BranchKind::object, 1e-4); }

TEST(FieldNetwork, ZeroUpstreamGivesZeroGradient) {
  const auto net = FieldNetwork<double>::init(tiny(), 8);
  const auto x = points(4, 13);
  const auto d = directions(4, 14);
  auto grad = net.zero_grad();
  net.backward(net.forward(BranchKind::object, x, d, std::vector<int>(4, 1)),
               Eigen::Matrix<double, 1, Eigen::Dynamic>::Zero(1, 4), Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, 4),
               grad);
  EXPECT_TRUE(grad.is_zero());
}

TEST(FieldNetwork, ObjectPassOnlyTouchesCodesOfItsObjects) {
  const auto net = FieldNetwork<double>::init(tiny(3), 9);
  const auto x = points(4, 15);
  const auto d = directions(4, 16);
  auto grad = net.zero_grad();
  net.backward(net.forward(BranchKind::object, x, d, std::vector<int>(4, 2)),
               Eigen::Matrix<double, 1, Eigen::Dynamic>::Ones(1, 4), Eigen::Matrix<double, 3, Eigen::Dynamic>::Ones(3, 4),
               grad);
  const int dim = net.config().code_dim;
  for (int k = 1; k <= 3; ++k) {
    bool any = false;
    for (int j = 0; j < dim; ++j) any = any || grad.codes[static_cast<std::size_t>((k - 1) * dim + j)] != 0.0;
    EXPECT_EQ(any, k == 2) << "code " << k;
  }
}

TEST(FieldNetwork, StaleForwardIsUsageError) {
  auto net = FieldNetwork<double>::init(tiny(), 10);
  const auto x = points(2, 17);
  const auto d = directions(2, 18);
  const auto e = net.forward(BranchKind::scene, x, d);
  net.scene_branch().density().bias(0) += 1.0;
  auto grad = net.zero_grad();
  EXPECT_THROW(net.backward(e, Eigen::Matrix<double, 1, Eigen::Dynamic>::Ones(1, 2),
                            Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, 2), grad),
               UsageError);
  const auto unrecorded = net.forward(BranchKind::scene, x, d, {}, false);
  EXPECT_THROW(net.backward(unrecorded, Eigen::Matrix<double, 1, Eigen::Dynamic>::Ones(1, 2),
                            Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, 2), grad),
               UsageError);
}

TEST(FieldNetwork, PixelColorGradientWrtVertexFeature) {
  auto net = FieldNetwork<double>::init(tiny(), 11);
  Ray ray;
  ray.origin = Vec3(0.05, 0.1, 2.0);
  ray.direction = Vec3(0, 0, -1);
  ray.near = 1.0;
  ray.far = 3.0;
  const SampleSet s = stratified_sample(ray, 16, false, 0);
  const std::vector<Vec3> d(s.size(), ray.direction);
  const Rgb<double> bg(0.2, 0.3, 0.4);
  const auto e = net.forward(BranchKind::scene, s.x, d);
  std::vector<double> sigma(e.out.sigma.data(), e.out.sigma.data() + e.size());
  const RgbBlock<double> color = e.out.color;
  const auto r = composite<double>(s, sigma, color, bg);
  CompositeUpstream<double> up;
  up.dcolor = Rgb<double>(1, 0, 0);
  const auto cg = composite_backward<double>(s, sigma, color, bg, r, up);
  auto grad = net.zero_grad();
  net.backward(e, Eigen::Map<const Eigen::Matrix<double, 1, Eigen::Dynamic>>(cg.dsigma.data(), 1, e.size()), cg.dcolor,
               grad);
  const TrilinearStencil st = net.grid().stencil(s.x[8]);
  const std::int64_t vertex = st.vertex[3];
  const std::size_t idx = static_cast<std::size_t>(vertex * net.config().scene_feature_dim);
  auto red = [&] { return render_samples<double>(net, BranchKind::scene, 0, ray, s, bg).color(0); };
  auto feats = net.grid().features(FeatureGroup::scene);
  const double keep = feats[idx];
  feats[idx] = keep + 1e-5;
  const double up_v = red();
  feats[idx] = keep - 1e-5;
  const double down_v = red();
  feats[idx] = keep;
  const double fd = (up_v - down_v) / 2e-5;
  EXPECT_NEAR(grad.grid_scene[idx], fd, 1e-3 * std::max(std::abs(fd), 1e-6));
  EXPECT_NE(fd, 0.0);
}

TEST(CodeLibrary, LookupRange) {
  const auto net = FieldNetwork<double>::init(tiny(3), 12);
  const auto& lib = net.codes();
  EXPECT_EQ(code_lookup(lib, 1).data(), lib.data().data());
  EXPECT_EQ(code_lookup(lib, 3).data(), lib.data().data() + 2 * lib.dim());
  EXPECT_THROW(code_lookup(lib, 4), InputError);
  EXPECT_THROW(code_lookup(lib, 0), InputError);
}

TEST(NetworkConfig, RejectsBadSizes) {
  NetworkConfig c = tiny();
  c.object_count = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny();
  c.scene_width = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(FieldNetwork, BranchRejectsWrongInputRows) {
  const auto net = FieldNetwork<double>::init(tiny(), 13);
  Matrix<double> in = Matrix<double>::Zero(3, 2);
  Matrix<double> dir = Matrix<double>::Zero(net.config().embedding.dir_dim(), 2);
  EXPECT_THROW(net.scene_branch().forward(in, dir, nullptr), ConfigError);
}

TEST(FieldNetwork, CastRoundTripPreservesParameters) {
  const auto net = FieldNetwork<double>::init(tiny(), 14);
  const auto f = net.cast<float>();
  const auto back = f.cast<double>();
  const auto x = points(3, 19);
  const auto d = directions(3, 20);
  const auto a = net.forward(BranchKind::scene, x, d, {}, false);
  const auto b = back.forward(BranchKind::scene, x, d, {}, false);
  EXPECT_LT((a.out.sigma - b.out.sigma).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_EQ(f.parameter_count(), net.parameter_count());
}

}  // namespace
}  // namespace ocnerf
