// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#include "ocnerf/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "json_util.hpp"
#include "ocnerf/config.hpp"
#include "ocnerf/metrics.hpp"
#include "ocnerf/render.hpp"
#include "ocnerf/rng.hpp"

namespace ocnerf {

using namespace detail;
namespace fs = std::filesystem;

void TrainConfig::validate() const {
  network.validate();
  step.validate();
  adam.validate();
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (batch_rays < 1) throw ConfigError("batch_rays must be >= 1");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (holdout < 0) throw ConfigError("holdout must be >= 0");
}

std::string LogRecord::to_json() const {
  json j = {{"step", step}, {"L_scn", scene_loss}, {"L_obj", object_loss}, {"pruned_fraction", pruned_fraction}};
  j["psnr_val"] = psnr_val ? json(*psnr_val) : json(nullptr);
  return j.dump();
}

NetworkConfig network_config_for(const Dataset& dataset, NetworkConfig base) {
  base.bounds = dataset.ray_bounds().bounds;
  base.object_count = std::max(1, dataset.object_count());
  return base;
}

std::optional<Aabb> estimate_object_bounds(const FieldNetwork<float>& net, int k, int lattice, double threshold) {
  const Aabb box = net.config().bounds;
  std::vector<Vec3> x;
  for (int i = 0; i < lattice; ++i)
    for (int j = 0; j < lattice; ++j)
      for (int l = 0; l < lattice; ++l) {
        const Vec3 u = (Vec3(i, j, l).array() + 0.5) / lattice;
        x.push_back(box.min + u.cwiseProduct(box.extent()));
      }
  const std::vector<Vec3> d(x.size(), Vec3(0.0, 0.0, -1.0));
  const FieldValues<float> v = evaluate_branch<float>(net, BranchKind::object, k, x, d);
  std::optional<Aabb> out;
  const Vec3 half = 0.5 * box.extent() / lattice;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(v.sigma[i] > threshold)) continue;
    const Aabb cell{x[i] - half, x[i] + half};
    if (!out) out = cell;
    out->min = out->min.cwiseMin(cell.min);
    out->max = out->max.cwiseMax(cell.max);
  }
  return out;
}

namespace {

struct PixelRef {
  std::size_t view;
  int row;
  int col;
};

void dump_batch(const fs::path& file, std::int64_t step, const std::vector<TrainRay>& rays,
                const std::vector<PixelRef>& refs, const StepOutput& out) {
  json arr = json::array();
  for (std::size_t i = 0; i < rays.size(); ++i)
    arr.push_back({{"view", refs[i].view},
                   {"row", refs[i].row},
                   {"col", refs[i].col},
                   {"origin", vec_json(rays[i].ray.origin)},
                   {"direction", vec_json(rays[i].ray.direction)},
                   {"near", rays[i].ray.near},
                   {"far", rays[i].ray.far},
                   {"object", rays[i].object},
                   {"mask", rays[i].mask},
                   {"weight", rays[i].weight}});
  const json j = {{"step", step},
                  {"L_scn", std::isfinite(out.scene_loss) ? json(out.scene_loss) : json("non-finite")},
                  {"L_obj", std::isfinite(out.object_loss) ? json(out.object_loss) : json("non-finite")},
                  {"rays", arr}};
  write_text(file, j.dump(1));
}

double validation_psnr(const FieldNetwork<float>& net, const Dataset& ds, std::size_t view, const StepConfig& step,
                       const RayBounds& bounds) {
  RenderConfig rc;
  rc.samples = step.samples;
  rc.ray_bounds = bounds;
  rc.background = step.background;
  rc.workers = step.workers;
  const BranchImage img = render_branch_view(net, BranchKind::scene, 0, ds.poses[view], rc);
  const RgbImage& gt = ds.images[view];
  std::vector<double> ref(gt.data.size());
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = gt.data[i] / 255.0;
  return psnr(img.rgb, ref);
}

}  // namespace

TrainResult train(const Dataset& dataset, const TrainConfig& config, const fs::path& out_dir,
                  const std::function<void(const LogRecord&)>& on_log) {
  dataset.validate();
  const int objects = dataset.object_count();
  if (objects < 1) throw InputError("training needs at least one labeled object");
  if (static_cast<std::size_t>(config.holdout) >= dataset.size())
    throw ConfigError("holdout leaves no training views");

  TrainConfig cfg = config;
  cfg.network = network_config_for(dataset, cfg.network);
  if (dataset.scene) cfg.step.background = dataset.scene->background;
  cfg.validate();

  const RayBounds bounds = dataset.ray_bounds();
  const std::size_t train_views = dataset.size() - static_cast<std::size_t>(cfg.holdout);
  const std::size_t val_view = cfg.holdout > 0 ? train_views : 0;
  std::vector<std::size_t> view_start(train_views + 1, 0);
  for (std::size_t v = 0; v < train_views; ++v)
    view_start[v + 1] = view_start[v] + static_cast<std::size_t>(dataset.images[v].width) * dataset.images[v].height;
  const std::size_t pixel_count = view_start.back();

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text(out_dir / "config.json", train_config_to_json(cfg));
  }
  std::ofstream log_file;
  if (!out_dir.empty()) {
    log_file.open(out_dir / "train_log.jsonl", std::ios::binary | std::ios::trunc);
    if (!log_file) throw LoadError((out_dir / "train_log.jsonl").string(), "cannot open for writing");
  }

  FieldNetwork<float> net = FieldNetwork<float>::init(cfg.network, cfg.seed);
  Adam<float> adam(net, cfg.adam);
  FieldGrad<float> grad = net.zero_grad();

  auto make_checkpoint = [&](std::int64_t step) {
    Checkpoint ckpt;
    ckpt.network = net;
    ckpt.background = cfg.step.background;
    ckpt.ray_bounds = bounds;
    ckpt.step = step;
    for (int k = 1; k <= cfg.network.object_count; ++k)
      ckpt.object_bounds.push_back(dataset.scene ? dataset.scene->instance_bounds(k) : estimate_object_bounds(net, k));
    return ckpt;
  };

  TrainResult result;
  GuardStats window;
  std::vector<TrainRay> rays(static_cast<std::size_t>(cfg.batch_rays));
  std::vector<PixelRef> refs(rays.size());
  std::vector<int> targets(rays.size());
  for (std::int64_t step = 0; step < cfg.iterations; ++step) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(step), 0x7261);
    for (std::size_t i = 0; i < rays.size(); ++i)
      targets[i] = static_cast<int>((static_cast<std::size_t>(step) * rays.size() + i) % static_cast<std::size_t>(objects)) + 1;
    for (std::size_t i = targets.size(); i > 1; --i) std::swap(targets[i - 1], targets[rng.below(i)]);

    for (std::size_t i = 0; i < rays.size(); ++i) {
      const std::size_t p = rng.below(pixel_count);
      const std::size_t v =
          static_cast<std::size_t>(std::upper_bound(view_start.begin(), view_start.end(), p) - view_start.begin()) - 1;
      const int w = dataset.images[v].width;
      const int local = static_cast<int>(p - view_start[v]);
      refs[i] = PixelRef{v, local / w, local % w};
      TrainRay& r = rays[i];
      r.ray = camera_ray(dataset.poses[v], Pixel{refs[i].row, refs[i].col}, bounds);
      r.color = dataset.images[v].color(refs[i].row, refs[i].col);
      r.object = targets[i];
      r.mask = dataset.masks[v].at(refs[i].row, refs[i].col) == targets[i] ? 1 : 0;
      r.depth = dataset.depths ? static_cast<double>((*dataset.depths)[v][static_cast<std::size_t>(local)])
                               : std::numeric_limits<double>::quiet_NaN();
    }
    std::vector<int> ids(rays.size());
    std::vector<std::uint8_t> masks(rays.size());
    for (std::size_t i = 0; i < rays.size(); ++i) {
      ids[i] = rays[i].object;
      masks[i] = rays[i].mask;
    }
    const std::vector<double> w = cfg.step.loss.balanced ? balanced_weight(ids, masks)
                                                         : std::vector<double>(rays.size(), 1.0);
    for (std::size_t i = 0; i < rays.size(); ++i) rays[i].weight = w[i];

    grad.set_zero();
    StepOutput out;
    std::string detail;
    try {
      out = ray_step<float>(net, rays, cfg.step, rng.next(), nullptr, &grad);
    } catch (const NumericError& e) {
      out.scene_loss = out.object_loss = std::numeric_limits<double>::quiet_NaN();
      detail = std::string(": ") + e.what();
    }
    if (!std::isfinite(out.scene_loss) || !std::isfinite(out.object_loss)) {
      std::string where;
      if (!out_dir.empty()) {
        dump_batch(out_dir / "nan_dump.json", step, rays, refs, out);
        where = "; batch written to " + (out_dir / "nan_dump.json").string();
      }
      throw NumericError("non-finite loss at step " + std::to_string(step) + " (L_scn=" +
                         std::to_string(out.scene_loss) + ", L_obj=" + std::to_string(out.object_loss) + ")" + detail +
                         where);
    }
    adam.step(net, grad);
    window.add(out.stats);

    const std::int64_t done = step + 1;
    if (done % cfg.log_every == 0 || done == cfg.iterations) {
      LogRecord rec;
      rec.step = done;
      rec.scene_loss = out.scene_loss;
      rec.object_loss = out.object_loss;
      rec.pruned_fraction = window.pruned_fraction();
      rec.psnr_val = validation_psnr(net, dataset, val_view, cfg.step, bounds);
      window = GuardStats{};
      result.log.push_back(rec);
      if (log_file.is_open()) {
        log_file << rec.to_json() << '\n';
        log_file.flush();
      }
      if (on_log) on_log(rec);
    }
    if (!out_dir.empty() && cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && done != cfg.iterations)
      save_checkpoint(make_checkpoint(done), out_dir / "checkpoint.ocnf");
  }
  result.checkpoint = make_checkpoint(cfg.iterations);
  if (!out_dir.empty()) save_checkpoint(result.checkpoint, out_dir / "checkpoint.ocnf");
  return result;
}

}  // namespace ocnerf
