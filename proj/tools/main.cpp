// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

// ocnerf: synth | train | render | edit | eval

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ocnerf/checkpoint.hpp"
#include "ocnerf/config.hpp"
#include "ocnerf/dataset.hpp"
#include "ocnerf/edit.hpp"
#include "ocnerf/errors.hpp"
#include "ocnerf/image_io.hpp"
#include "ocnerf/metrics.hpp"
#include "ocnerf/render.hpp"
#include "ocnerf/synthetic.hpp"
#include "ocnerf/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumeric = 2, kIo = 3 };

struct SynthArgs {
  std::string preset = "two-box-occlusion";
  std::string scene_file;
  std::string poses_file;
  std::string rig;
  std::string out;
  int views = 60;
  int size = 64;
  int oracle_samples = 1024;
  bool holdout = false;
  int workers = 1;
};

struct TrainArgs {
  std::string data;
  std::string out;
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

struct RenderArgs {
  std::string checkpoint;
  std::string poses;
  std::string data;
  std::string out;
  std::string script;
  int samples = 64;
  std::uint64_t seed = 0;
  bool jitter = false;
  bool depth = false;
  int workers = 1;
};

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
  int samples = 64;
  int workers = 1;
};

std::vector<ocnerf::CameraPose> render_poses(const RenderArgs& a) {
  if (!a.poses.empty()) return ocnerf::load_poses(a.poses);
  if (!a.data.empty()) return ocnerf::load_poses(fs::path(a.data) / "poses.json");
  throw ocnerf::UsageError("give --poses or --data");
}

void write_image(const fs::path& file, int width, int height, const std::vector<double>& rgb) {
  ocnerf::PngImage png{width, height, 3, std::vector<std::uint8_t>(rgb.size())};
  for (std::size_t i = 0; i < rgb.size(); ++i) png.data[i] = ocnerf::to_byte(rgb[i]);
  ocnerf::write_png(file, png);
}

int run_synth(const SynthArgs& a) {
  const ocnerf::SyntheticScene scene = a.scene_file.empty()
                                           ? ocnerf::preset_scene(a.preset)
                                           : ocnerf::load_scene(a.scene_file);
  std::vector<ocnerf::CameraPose> poses;
  if (!a.poses_file.empty()) {
    poses = ocnerf::load_poses(a.poses_file);
  } else {
    const std::string rig = a.rig.empty() ? a.preset : a.rig;
    poses = a.holdout ? ocnerf::preset_holdout(rig, a.size) : ocnerf::preset_rig(rig, a.views, a.size);
  }
  ocnerf::generate_synthetic_scene(scene, poses, a.oracle_samples, a.out, a.workers);
  std::cout << "wrote " << poses.size() << " views to " << a.out << "\n";
  return kOk;
}

int run_train(const TrainArgs& a) {
  ocnerf::TrainConfig cfg = a.config.empty() ? ocnerf::default_train_config() : ocnerf::load_train_config(a.config);
  for (const auto& o : a.overrides) ocnerf::apply_override(cfg, o);
  if (a.seed) cfg.seed = *a.seed;
  if (a.workers) cfg.step.workers = *a.workers;
  const ocnerf::Dataset ds = ocnerf::load_dataset(a.data);
  ocnerf::train(ds, cfg, a.out, [](const ocnerf::LogRecord& r) { std::cout << r.to_json() << std::endl; });
  std::cout << "checkpoint: " << (fs::path(a.out) / "checkpoint.ocnf").string() << "\n";
  return kOk;
}

int run_render(const RenderArgs& a, bool edit) {
  const ocnerf::Checkpoint ckpt = ocnerf::load_checkpoint(a.checkpoint);
  const auto poses = render_poses(a);
  ocnerf::EditScript script;
  if (edit) script = ocnerf::load_edit_script(a.script);
  ocnerf::RenderConfig rc;
  rc.samples = a.samples;
  rc.seed = a.seed;
  rc.jitter = a.jitter;
  rc.ray_bounds = ckpt.ray_bounds;
  rc.background = ckpt.background;
  rc.workers = a.workers;
  fs::create_directories(a.out);
  for (std::size_t v = 0; v < poses.size(); ++v) {
    const auto img = ocnerf::render_view(ckpt.network, ckpt.object_bounds, poses[v], script, rc);
    const std::string stem = ocnerf::view_stem(v);
    write_image(fs::path(a.out) / (stem + ".png"), img.width, img.height, img.rgb);
    if (a.depth) {
      const std::vector<float> d(img.depth.begin(), img.depth.end());
      ocnerf::write_f32(fs::path(a.out) / (stem + ".f32"), d);
    }
  }
  std::cout << "wrote " << poses.size() << " images to " << a.out << "\n";
  return kOk;
}

int run_eval(const EvalArgs& a) {
  const ocnerf::Checkpoint ckpt = ocnerf::load_checkpoint(a.checkpoint);
  const ocnerf::Dataset ds = ocnerf::load_dataset(a.data);
  ocnerf::RenderConfig rc;
  rc.samples = a.samples;
  rc.ray_bounds = ckpt.ray_bounds;
  rc.background = ckpt.background;
  rc.workers = a.workers;
  const int objects = ckpt.network.config().object_count;

  json views = json::array();
  double psnr_sum = 0.0;
  std::vector<double> iou_sum(static_cast<std::size_t>(objects), 0.0);
  std::vector<double> full_iou_sum(static_cast<std::size_t>(objects), 0.0);
  std::vector<double> soft_sum(static_cast<std::size_t>(objects), 0.0);
  std::printf("%6s %10s", "view", "psnr_db");
  for (int k = 1; k <= objects; ++k) std::printf("   iou_obj%d", k);
  std::printf("\n");
  for (std::size_t v = 0; v < ds.size(); ++v) {
    const auto scene = ocnerf::render_branch_view(ckpt.network, ocnerf::BranchKind::scene, 0, ds.poses[v], rc);
    std::vector<double> gt(ds.images[v].data.size());
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = ds.images[v].data[i] / 255.0;
    const double p = ocnerf::psnr(scene.rgb, gt);
    psnr_sum += p;
    json jv = {{"view", v}, {"psnr", p}};
    json ious = json::array();
    json full_ious = json::array();
    std::printf("%6zu %10.3f", v, p);
    for (int k = 1; k <= objects; ++k) {
      const auto obj = ocnerf::render_branch_view(ckpt.network, ocnerf::BranchKind::object, k, ds.poses[v], rc);
      std::vector<std::uint8_t> pred(obj.opacity.size());
      std::vector<std::uint8_t> mask(obj.opacity.size());
      for (std::size_t i = 0; i < pred.size(); ++i) {
        pred[i] = obj.opacity[i] > 0.5 ? 1 : 0;
        mask[i] = ds.masks[v].labels[i] == k ? 1 : 0;
      }
      const double iou = ocnerf::iou(pred, mask);
      iou_sum[static_cast<std::size_t>(k - 1)] += iou;
      ious.push_back(iou);
      std::printf(" %10.4f", iou);
      if (ds.scene) {
        const auto solo = ocnerf::oracle_render_view(ds.scene->only(k), ds.poses[v], 1024, ckpt.ray_bounds, a.workers);
        std::vector<std::uint8_t> full(pred.size());
        for (std::size_t i = 0; i < full.size(); ++i) full[i] = solo.mask[i] == k ? 1 : 0;
        const double fi = ocnerf::iou(pred, full);
        full_iou_sum[static_cast<std::size_t>(k - 1)] += fi;
        full_ious.push_back(fi);
        soft_sum[static_cast<std::size_t>(k - 1)] += ocnerf::soft_iou(obj.opacity, full);
      }
    }
    std::printf("\n");
    jv["object_iou"] = ious;
    if (ds.scene) jv["object_iou_full"] = full_ious;
    views.push_back(jv);
  }
  const double n = static_cast<double>(ds.size());
  json report = {{"views", views}, {"mean_psnr", psnr_sum / n}};
  json mean_iou = json::array();
  json mean_full = json::array();
  json mean_soft = json::array();
  for (int k = 0; k < objects; ++k) {
    mean_iou.push_back(iou_sum[static_cast<std::size_t>(k)] / n);
    if (ds.scene) {
      mean_full.push_back(full_iou_sum[static_cast<std::size_t>(k)] / n);
      mean_soft.push_back(soft_sum[static_cast<std::size_t>(k)] / n);
    }
  }
  report["mean_object_iou"] = mean_iou;
  if (ds.scene) {
    report["mean_object_iou_full"] = mean_full;
    report["mean_object_soft_iou_full"] = mean_soft;
  }
  std::printf("%6s %10.3f", "mean", psnr_sum / n);
  for (int k = 0; k < objects; ++k) std::printf(" %10.4f", iou_sum[static_cast<std::size_t>(k)] / n);
  std::printf("\n");
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw ocnerf::LoadError(a.out, "cannot open for writing");
    out << report.dump(2) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-compositional radiance fields: synthesize, train, render, edit, evaluate."};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Render a synthetic dataset with the analytic oracle");
  s->add_option("--preset", synth.preset, "Built-in scene")->check(CLI::IsMember(ocnerf::preset_names()));
  s->add_option("--scene", synth.scene_file, "scene.json to use instead of a preset")->check(CLI::ExistingFile);
  s->add_option("--poses", synth.poses_file, "poses.json to use instead of the preset rig")->check(CLI::ExistingFile);
  s->add_option("--rig", synth.rig, "Camera rig of this preset (default: the scene preset's)")
      ->check(CLI::IsMember(ocnerf::preset_names()));
  s->add_option("--views", synth.views, "Number of rig views")->check(CLI::PositiveNumber);
  s->add_option("--size", synth.size, "Image width and height")->check(CLI::PositiveNumber);
  s->add_option("--oracle-samples", synth.oracle_samples, "Quadrature samples per ray (>= 1024)");
  s->add_flag("--holdout", synth.holdout, "Use the preset's held-out cameras");
  s->add_option("--workers", synth.workers, "Worker threads (0 = all cores)");
  s->add_option("-o,--out", synth.out, "Output dataset directory")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train scene and object branches");
  t->add_option("-d,--data", train.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  t->add_option("-o,--out", train.out, "Output directory")->required();
  t->add_option("-c,--config", train.config, "JSON config with flat keys")->check(CLI::ExistingFile);
  t->add_option("--set", train.overrides, "Override a config key: key=value (repeatable)");
  t->add_option("--seed", train.seed, "Random seed");
  t->add_option("--workers", train.workers, "Worker threads (0 = all cores)");
  t->footer("Config keys: " + [] {
    std::string keys;
    for (const auto& k : ocnerf::train_config_keys()) keys += (keys.empty() ? "" : ", ") + k;
    return keys;
  }());

  RenderArgs render;
  auto add_render_opts = [](CLI::App* c, RenderArgs& a) {
    c->add_option("-m,--checkpoint", a.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
    c->add_option("--poses", a.poses, "poses.json")->check(CLI::ExistingFile);
    c->add_option("-d,--data", a.data, "Dataset directory whose poses are rendered")->check(CLI::ExistingDirectory);
    c->add_option("-o,--out", a.out, "Output directory")->required();
    c->add_option("--samples", a.samples, "Samples per ray")->check(CLI::PositiveNumber);
    c->add_option("--seed", a.seed, "Sampling seed");
    c->add_flag("--jitter", a.jitter, "Jittered stratified samples");
    c->add_flag("--depth", a.depth, "Also write NNNN.f32 depth maps");
    c->add_option("--workers", a.workers, "Worker threads (0 = all cores)");
  };
  auto* r = app.add_subcommand("render", "Render novel views");
  add_render_opts(r, render);
  RenderArgs edit;
  auto* e = app.add_subcommand("edit", "Render views of an edited scene");
  add_render_opts(e, edit);
  e->add_option("-s,--script", edit.script, "Edit script (JSON)")->required()->check(CLI::ExistingFile);

  EvalArgs eval;
  auto* v = app.add_subcommand("eval", "PSNR and object-opacity IoU report");
  v->add_option("-m,--checkpoint", eval.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  v->add_option("-d,--data", eval.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  v->add_option("-o,--out", eval.out, "Report file (JSON)");
  v->add_option("--samples", eval.samples, "Samples per ray")->check(CLI::PositiveNumber);
  v->add_option("--workers", eval.workers, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return run_synth(synth);
    if (*t) return run_train(train);
    if (*r) return run_render(render, false);
    if (*e) return run_render(edit, true);
    if (*v) return run_eval(eval);
  } catch (const ocnerf::NumericError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return kNumeric;
  } catch (const ocnerf::LoadError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kIo;
  } catch (const ocnerf::ValidationError& err) {
    std::cerr << "invalid data: " << err.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kIo;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
