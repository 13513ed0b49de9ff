// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/field_network.hpp"

#include <algorithm>

#include "ocnerf/errors.hpp"

namespace ocnerf {

BranchConfig NetworkConfig::scene_branch() const {
  BranchConfig b;
  b.input_dim = embedding.space_dim(scene_feature_dim);
  b.dir_dim = embedding.dir_dim();
  b.depth = scene_depth;
  b.width = scene_width;
  b.color_width = color_width;
  b.density_bias_init = density_bias_init;
  return b;
}

BranchConfig NetworkConfig::object_branch() const {
  BranchConfig b;
  b.input_dim = embedding.space_dim(scene_feature_dim) + embedding.object_feature_dim(object_feature_dim) + code_dim;
  b.dir_dim = embedding.dir_dim();
  b.depth = object_depth;
  b.width = object_width;
  b.color_width = color_width;
  b.density_bias_init = density_bias_init;
  return b;
}

void NetworkConfig::validate() const {
  if (object_count < 1) throw ConfigError("network needs at least one object code");
  if (code_dim < 1 || grid_resolution < 1 || scene_feature_dim < 0 || object_feature_dim < 0 || scene_depth < 1 ||
      scene_width < 1 || object_depth < 1 || object_width < 1 || color_width < 1)
    throw ConfigError("network sizes must be positive");
  if (embedding.xyz.frequencies < 0 || embedding.dir.frequencies < 0 || embedding.feature.frequencies < 0)
    throw ConfigError("encoding frequency counts must be >= 0");
  if (!(bounds.max.array() > bounds.min.array()).all()) throw ConfigError("network bounds are empty");
}

bool is_grid_tensor(const std::string& name) { return name.rfind("grid.", 0) == 0; }

template <class T>
std::span<T> ObjectCodeLibrary<T>::code(int k) {
  if (k < 1 || k > count_) throw InputError("object id " + std::to_string(k) + " outside 1.." + std::to_string(count_));
  return std::span<T>(codes_).subspan(static_cast<std::size_t>((k - 1) * dim_), static_cast<std::size_t>(dim_));
}

template <class T>
std::span<const T> ObjectCodeLibrary<T>::code(int k) const {
  if (k < 1 || k > count_) throw InputError("object id " + std::to_string(k) + " outside 1.." + std::to_string(count_));
  return std::span<const T>(codes_).subspan(static_cast<std::size_t>((k - 1) * dim_), static_cast<std::size_t>(dim_));
}

template <class T>
void FieldGrad<T>::set_zero() {
  scene.set_zero();
  object.set_zero();
  std::fill(codes.begin(), codes.end(), T(0));
  std::fill(grid_scene.begin(), grid_scene.end(), T(0));
  std::fill(grid_object.begin(), grid_object.end(), T(0));
}

template <class T>
void FieldGrad<T>::visit(const TensorVisitor<T>& fn) {
  fn("grid.scene", grid_scene, {static_cast<std::int64_t>(grid_scene.size())});
  fn("grid.object", grid_object, {static_cast<std::int64_t>(grid_object.size())});
  fn("codes", codes, {static_cast<std::int64_t>(codes.size())});
  scene.visit("scene", fn);
  object.visit("object", fn);
}

template <class T>
void FieldGrad<T>::add(const FieldGrad& other) {
  std::vector<std::span<T>> mine;
  visit([&](const std::string&, std::span<T> v, const auto&) { mine.push_back(v); });
  std::size_t i = 0;
  const_cast<FieldGrad&>(other).visit([&](const std::string&, std::span<T> v, const auto&) {
    auto dst = mine[i++];
    for (std::size_t j = 0; j < v.size(); ++j) dst[j] += v[j];
  });
}

template <class T>
bool FieldGrad<T>::is_zero() {
  bool zero = true;
  visit([&](const std::string&, std::span<T> v, const auto&) {
    zero = zero && std::all_of(v.begin(), v.end(), [](T x) { return x == T(0); });
  });
  return zero;
}

template <class T>
FieldNetwork<T>::FieldNetwork(const NetworkConfig& cfg)
    : cfg_(cfg),
      grid_(VoxelGrid<T>::covering(cfg.bounds, cfg.grid_resolution, cfg.scene_feature_dim, cfg.object_feature_dim)),
      scene_(cfg.scene_branch()),
      object_(cfg.object_branch()),
      codes_(cfg.object_count, cfg.code_dim) {
  cfg.validate();
}

template <class T>
FieldNetwork<T> FieldNetwork<T>::init(const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  FieldNetwork net(cfg);
  net.grid_.init_uniform(cfg.grid_init_scale, seed);
  CounterRng scene_rng(seed, 1);
  CounterRng object_rng(seed, 2);
  CounterRng code_rng(seed, 3);
  net.scene_ = Branch<T>::init(cfg.scene_branch(), scene_rng);
  net.object_ = Branch<T>::init(cfg.object_branch(), object_rng);
  for (auto& v : net.codes_.data()) v = static_cast<T>(cfg.code_init_scale * code_rng.normal());
  return net;
}

template <class T>
FieldEval<T> FieldNetwork<T>::forward(BranchKind kind, std::span<const Vec3> x, std::span<const Vec3> d,
                                      std::span<const int> objects, bool record) const {
  const std::size_t n = x.size();
  if (d.size() != n) throw InputError("forward: point/direction count mismatch");
  if (kind == BranchKind::object && objects.size() != n) throw InputError("forward: one object id per point required");

  const EmbeddingConfig& emb = cfg_.embedding;
  const int ds = cfg_.scene_feature_dim;
  const int dobj = cfg_.object_feature_dim;
  const int xyz_dim = emb.xyz.output_dim(3);
  const int fs_dim = emb.feature.output_dim(ds);
  const int fo_dim = emb.object_feature_dim(dobj);
  const int space_dim = xyz_dim + fs_dim;
  const int rows = kind == BranchKind::scene ? space_dim : space_dim + fo_dim + cfg_.code_dim;
  const auto cols = static_cast<Eigen::Index>(n);

  FieldEval<T> ev;
  ev.kind = kind;
  ev.version = record ? version_ : 0;
  ev.stencils.resize(n);
  ev.input.resize(rows, cols);
  ev.dir.resize(emb.dir_dim(), cols);
  ev.scene_feature.resize(ds, cols);
  if (kind == BranchKind::object) {
    ev.objects.assign(objects.begin(), objects.end());
    ev.object_feature.resize(dobj, cols);
  }

  for (std::size_t p = 0; p < n; ++p) {
    const auto c = static_cast<Eigen::Index>(p);
    if (!x[p].allFinite() || !d[p].allFinite()) throw NumericError("forward: non-finite point or direction");
    const TrilinearStencil& st = ev.stencils[p] = grid_.stencil(x[p]);
    T* col = ev.input.col(c).data();
    T* sf = ev.scene_feature.col(c).data();
    grid_.interpolate(st, FeatureGroup::scene, std::span<T>(sf, static_cast<std::size_t>(ds)));

    const Vec3 xn = grid_.normalize(x[p]);
    const std::array<T, 3> xv{static_cast<T>(xn.x()), static_cast<T>(xn.y()), static_cast<T>(xn.z())};
    const std::array<T, 3> dv{static_cast<T>(d[p].x()), static_cast<T>(d[p].y()), static_cast<T>(d[p].z())};
    positional_encode<T>(xv, emb.xyz, std::span<T>(col, static_cast<std::size_t>(xyz_dim)));
    positional_encode<T>(std::span<const T>(sf, static_cast<std::size_t>(ds)), emb.feature,
                         std::span<T>(col + xyz_dim, static_cast<std::size_t>(fs_dim)));
    positional_encode<T>(dv, emb.dir, std::span<T>(ev.dir.col(c).data(), static_cast<std::size_t>(ev.dir.rows())));

    if (kind == BranchKind::object) {
      T* of = ev.object_feature.col(c).data();
      grid_.interpolate(st, FeatureGroup::object, std::span<T>(of, static_cast<std::size_t>(dobj)));
      positional_encode<T>(std::span<const T>(of, static_cast<std::size_t>(dobj)), emb.feature,
                           std::span<T>(col + space_dim, static_cast<std::size_t>(fo_dim)));
      const auto code = codes_.code(objects[p]);
      std::copy(code.begin(), code.end(), col + space_dim + fo_dim);
    }
  }
  const Branch<T>& branch = kind == BranchKind::scene ? scene_ : object_;
  ev.out = branch.forward(ev.input, ev.dir, record ? &ev.cache : nullptr);
  return ev;
}

template <class T>
void FieldNetwork<T>::backward(const FieldEval<T>& ev, const Eigen::Matrix<T, 1, Eigen::Dynamic>& dsigma,
                               const Eigen::Matrix<T, 3, Eigen::Dynamic>& dcolor, FieldGrad<T>& grad) const {
  if (ev.version != version_) throw UsageError("backward: parameters changed since the forward pass");
  const bool object = ev.kind == BranchKind::object;
  const Branch<T>& branch = object ? object_ : scene_;
  Branch<T>& branch_grad = object ? grad.object : grad.scene;
  const Matrix<T> dinput = branch.backward(ev.cache, ev.out, dsigma, dcolor, branch_grad);

  const EmbeddingConfig& emb = cfg_.embedding;
  const int ds = cfg_.scene_feature_dim;
  const int dobj = cfg_.object_feature_dim;
  const int xyz_dim = emb.xyz.output_dim(3);
  const int fs_dim = emb.feature.output_dim(ds);
  const int fo_dim = emb.object_feature_dim(dobj);
  const int space_dim = xyz_dim + fs_dim;

  std::vector<T> df(static_cast<std::size_t>(std::max(ds, dobj)));
  for (Eigen::Index p = 0; p < ev.size(); ++p) {
    const TrilinearStencil& st = ev.stencils[static_cast<std::size_t>(p)];
    const T* dcol = dinput.col(p).data();
    if (st.inside) {
      std::fill(df.begin(), df.end(), T(0));
      positional_encode_backward<T>(std::span<const T>(ev.scene_feature.col(p).data(), static_cast<std::size_t>(ds)),
                                    emb.feature, std::span<const T>(dcol + xyz_dim, static_cast<std::size_t>(fs_dim)),
                                    std::span<T>(df.data(), static_cast<std::size_t>(ds)));
      VoxelGrid<T>::scatter(st, ds, std::span<const T>(df.data(), static_cast<std::size_t>(ds)), grad.grid_scene);
      if (object) {
        std::fill(df.begin(), df.end(), T(0));
        positional_encode_backward<T>(
            std::span<const T>(ev.object_feature.col(p).data(), static_cast<std::size_t>(dobj)), emb.feature,
            std::span<const T>(dcol + space_dim, static_cast<std::size_t>(fo_dim)),
            std::span<T>(df.data(), static_cast<std::size_t>(dobj)));
        VoxelGrid<T>::scatter(st, dobj, std::span<const T>(df.data(), static_cast<std::size_t>(dobj)),
                              grad.grid_object);
      }
    }
    if (object) {
      const int k = ev.objects[static_cast<std::size_t>(p)];
      T* gcode = grad.codes.data() + static_cast<std::size_t>((k - 1) * cfg_.code_dim);
      const T* src = dcol + space_dim + fo_dim;
      for (int j = 0; j < cfg_.code_dim; ++j) gcode[j] += src[j];
    }
  }
}

template <class T>
FieldGrad<T> FieldNetwork<T>::zero_grad() const {
  FieldGrad<T> g;
  g.scene = Branch<T>(cfg_.scene_branch());
  g.object = Branch<T>(cfg_.object_branch());
  g.codes.assign(codes_.data().size(), T(0));
  g.grid_scene.assign(grid_.features(FeatureGroup::scene).size(), T(0));
  g.grid_object.assign(grid_.features(FeatureGroup::object).size(), T(0));
  return g;
}

template <class T>
void FieldNetwork<T>::visit_parameters(const TensorVisitor<T>& fn) {
  ++version_;
  auto gs = grid_.features(FeatureGroup::scene);
  auto go = grid_.features(FeatureGroup::object);
  fn("grid.scene", gs, {static_cast<std::int64_t>(gs.size())});
  fn("grid.object", go, {static_cast<std::int64_t>(go.size())});
  fn("codes", codes_.data(), {codes_.count(), codes_.dim()});
  scene_.visit("scene", fn);
  object_.visit("object", fn);
}

template <class T>
std::size_t FieldNetwork<T>::parameter_count() const {
  return grid_.features(FeatureGroup::scene).size() + grid_.features(FeatureGroup::object).size() +
         codes_.data().size() + scene_.parameter_count() + object_.parameter_count();
}

template class ObjectCodeLibrary<float>;
template class ObjectCodeLibrary<double>;
template struct FieldGrad<float>;
template struct FieldGrad<double>;
template class FieldNetwork<float>;
template class FieldNetwork<double>;

}  // namespace ocnerf
