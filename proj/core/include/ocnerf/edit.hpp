// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocnerf/render.hpp"

namespace ocnerf {

enum class EditMode { move, duplicate, remove };

struct Edit {
  int object = 1;
  RigidTransform transform;
  EditMode mode = EditMode::move;
};

struct RemovalBox {
  int object = 1;
  Aabb box;
};

/// move: the original is pruned from the scene branch and the object is drawn
/// at `transform`. duplicate: the original stays and a copy is drawn at
/// `transform`. remove: the original is pruned.
struct EditScript {
  std::vector<Edit> edits;
  std::vector<RemovalBox> removal_boxes;

  bool empty() const { return edits.empty() && removal_boxes.empty(); }
  /// Throws InputError on object ids outside 1..K or non-rigid transforms.
  void validate(int object_count) const;
};

/// {"edits": [{"object", "mode", "R", "t"}], "removal_boxes": [{"object", "min", "max"}]}
EditScript parse_edit_script(const std::string& text, const std::string& source_name = "edit script");
EditScript load_edit_script(const std::filesystem::path& path);
std::string edit_script_to_json(const EditScript& script);

/// Default removal region: the object's box grown by 5% of its extent per side.
Aabb default_removal_box(const Aabb& object_box);

/// Scene-space boxes pruned from the scene branch: every explicit removal box,
/// plus the default box of each moved or removed object without one. Throws
/// InputError when such an object has no known bounds.
std::vector<Aabb> removal_regions(const EditScript& script, std::span<const std::optional<Aabb>> object_bounds);

/// Per-source samples along one ray; source 0 is the scene, k > 0 object k.
struct SourceStream {
  int source = 0;
  std::vector<double> t;
  std::vector<double> sigma;
  std::vector<Vec3> color;
};

struct ComposedSample {
  double t = 0.0;
  double sigma = 0.0;
  Vec3 color = Vec3::Zero();
  int source = 0;
};

/// Scene branch at `samples` with sigma forced to 0 inside any region.
SourceStream background_stage(const FieldNetwork<float>& net, const Ray& ray, const SampleSet& samples,
                              std::span<const Aabb> regions);

/// Object k drawn at `transform`: positions and the view direction are mapped
/// back by the inverse transform before querying the object branch. When
/// `support` is given (in the object's original frame), samples mapping
/// outside it get sigma = 0. Throws InputError for a non-rigid transform.
SourceStream object_stage(const FieldNetwork<float>& net, const Ray& ray, const SampleSet& samples, int k,
                          const RigidTransform& transform, const std::optional<Aabb>& support = std::nullopt);

/// Canonical merge: ascending t, ties broken by source, then sigma and color,
/// so the result does not depend on the order streams are supplied in.
std::vector<ComposedSample> merge_streams(std::span<const SourceStream> streams);

/// Merges, recomputes spacings (a sample's interval runs to the next strictly
/// larger t, or to far) and composites.
RenderResult<double> compose(const Ray& ray, std::span<const SourceStream> streams, const Vec3& background);

struct EditedImage {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;
  std::vector<double> opacity;
  std::vector<double> depth;
};

/// Background stage + object stages for every pixel. An empty script is a
/// plain scene-branch render.
EditedImage render_view(const FieldNetwork<float>& net, std::span<const std::optional<Aabb>> object_bounds,
                        const CameraPose& pose, const EditScript& script, const RenderConfig& cfg);

}  // namespace ocnerf
