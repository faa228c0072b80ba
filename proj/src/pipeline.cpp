#include "topoflow/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <utility>

namespace topoflow {

UnifiedModel build_unified_model(const Scene& scene, const ModelOptions& options) {
  validate(scene.hand);
  validate(scene.object);

  UnifiedModel model;
  model.layout = AtlasLayout::split(options.atlas_size);
  model.hand_faces = static_cast<int>(scene.hand.faces.size());
  model.hand_vertices = static_cast<int>(scene.hand.vertices.size());

  GridAtlas hand_atlas;
  if (!scene.hand.faces.empty()) {
    hand_atlas = build_grid_atlas(scene.hand, {model.layout.hand.rect, options.atlas_size, options.atlas_margin});
    model.layout.hand = hand_atlas.placement;
  }
  for (std::size_t f = 0; f < scene.hand.faces.size(); ++f) {
    model.faces.push_back(scene.hand.faces[f]);
    model.face_instance.push_back(Instance::Hand);
    const auto& uv = hand_atlas.face_uvs[f];
    model.atlas.push_back({uv_to_atlas_px(uv[0], options.atlas_size),
                           uv_to_atlas_px(uv[1], options.atlas_size),
                           uv_to_atlas_px(uv[2], options.atlas_size)});
  }

  if (!scene.object.faces.empty()) {
    const PixelRect rect = model.layout.object.rect;
    std::vector<FaceUv> placed;
    if (scene.object.face_uvs) {
      placed = place_uvs_in_rect(*scene.object.face_uvs, rect, options.atlas_size);
      model.object_texture_uvs = *scene.object.face_uvs;
    } else {
      const GridAtlas grid =
          build_grid_atlas(scene.object, {rect, options.atlas_size, options.atlas_margin});
      model.layout.object = grid.placement;
      placed = grid.face_uvs;
      // Without OBJ UVs the texture image is read as laid out in the grid.
      for (const auto& uv : grid.face_uvs) {
        FaceUv local;
        for (int k = 0; k < 3; ++k) {
          const Vec2 px = uv_to_atlas_px(uv[k], options.atlas_size);
          local[k] = Vec2((px.x() - rect.x) / rect.width, 1.0 - (px.y() - rect.y) / rect.height);
        }
        model.object_texture_uvs.push_back(local);
      }
    }
    for (std::size_t f = 0; f < scene.object.faces.size(); ++f) {
      const Face& face = scene.object.faces[f];
      model.faces.push_back({face[0] + model.hand_vertices, face[1] + model.hand_vertices,
                             face[2] + model.hand_vertices});
      model.face_instance.push_back(Instance::Object);
      model.atlas.push_back({uv_to_atlas_px(placed[f][0], options.atlas_size),
                             uv_to_atlas_px(placed[f][1], options.atlas_size),
                             uv_to_atlas_px(placed[f][2], options.atlas_size)});
    }
  }
  return model;
}

std::vector<Vec3> posed_vertices(const Scene& scene) {
  std::vector<Vec3> out = scene.hand.vertices;
  if (!scene.object.faces.empty()) {
    const Mesh object = apply_rigid_transform(scene.object, scene.object_pose);
    out.insert(out.end(), object.vertices.begin(), object.vertices.end());
  }
  return out;
}

ScreenCoords project_scene(const Scene& scene) {
  Mesh merged;
  merged.vertices = posed_vertices(scene);
  return project(scene.camera, merged);
}

RasterBuffers rasterize_view(const Scene& scene, const UnifiedModel& model) {
  validate(scene.camera);
  const ScreenCoords screen = project_scene(scene);
  return rasterize({screen, model.faces, model.face_instance}, scene.camera.width, scene.camera.height);
}

RasterBuffers rasterize_unified(const UnifiedModel& model) {
  // Atlas triangles do not share corners, so each face gets its own three.
  std::vector<Vec3> corners;
  std::vector<Face> faces;
  corners.reserve(model.atlas.size() * 3);
  faces.reserve(model.atlas.size());
  for (std::size_t f = 0; f < model.atlas.size(); ++f) {
    const int base = static_cast<int>(3 * f);
    for (int k = 0; k < 3; ++k) corners.emplace_back(model.atlas[f][k].x(), model.atlas[f][k].y(), 1.0);
    faces.push_back({base, base + 1, base + 2});
  }
  const int size = model.layout.atlas_size;
  return rasterize({corners, faces, model.face_instance}, size, size);
}

namespace {

class StageRunner {
 public:
  explicit StageRunner(std::vector<StageTiming>& timings) : timings_(timings) {}

  template <typename Fn>
  void operator()(const char* stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      fn();
      record(stage, start);
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(stage, e);
    }
  }

 private:
  void record(const char* stage, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - start;
    timings_.push_back({stage, dt.count()});
  }

  std::vector<StageTiming>& timings_;
};

bool any_set(const Mask& mask) {
  return std::any_of(mask.data().begin(), mask.data().end(), [](std::uint8_t v) { return v != 0; });
}

}  // namespace

PipelineResult run_pipeline(const PipelineInputs& in, const PipelineOptions& options) {
  PipelineResult r;
  StageRunner stage(r.timings);

  stage("model", [&] {
    require_same_topology(in.source.hand, in.target.hand);
    require_same_topology(in.source.object, in.target.object);
    if (!in.source_image.same_shape(in.source.camera.width, in.source.camera.height)) {
      throw Error(ErrorCode::SizeMismatch, "source image is " + std::to_string(in.source_image.width()) +
                                               "x" + std::to_string(in.source_image.height()) +
                                               ", source camera expects " +
                                               std::to_string(in.source.camera.width) + "x" +
                                               std::to_string(in.source.camera.height));
    }
    r.model = build_unified_model(in.source, options.model);
  });

  stage("raster", [&] {
    r.source_raster = rasterize_view(in.source, r.model);
    r.target_raster = rasterize_view(in.target, r.model);
    r.unified_raster = rasterize_unified(r.model);
  });

  stage("flow_us", [&] {
    const ScreenCoords source_screen = project_scene(in.source);
    r.flow_us = flow_unified_from_source(r.unified_raster, source_screen, r.model.faces);
  });
  stage("visibility", [&] {
    r.visibility = visibility_unified_from_source(r.unified_raster, r.source_raster, r.flow_us);
  });
  stage("unified_texture", [&] {
    ObjectTexture object;
    object.texture = in.object_texture ? &*in.object_texture : nullptr;
    object.face_texture_uvs = r.model.object_texture_uvs;
    object.first_face = r.model.hand_faces;
    r.unified = assemble_unified_texture(in.source_image, r.flow_us, r.visibility, r.unified_raster,
                                         r.model.layout, object, options.dilation_passes);
  });
  stage("flow_tu", [&] { r.flow_tu = flow_target_from_unified(r.target_raster, r.model.atlas); });
  stage("coarse_target", [&] { r.coarse_target = synthesize_coarse_target(r.flow_tu, r.unified); });
  stage("topology", [&] { r.topology = topology_map(r.target_raster, r.model.atlas); });
  stage("masks", [&] { r.masks = analytic_masks(r.target_raster); });
  stage("flow_ts", [&] {
    r.flow_ts = compose_flow_target_from_source(r.flow_tu, r.flow_us, r.visibility, r.unified_raster);
  });
  if (options.skip_fusion) return r;

  stage("hand_stream", [&] {
    r.hand_layer = warp(r.flow_ts, in.source_image, SampleMode::Bilinear);
    if (any_set(r.masks.hand)) r.hand_layer = fill_hand_holes(r.hand_layer, r.target_raster, r.flow_ts.valid);
  });
  stage("background", [&] {
    Mask source_fg(r.source_raster.width(), r.source_raster.height(), 0);
    for (std::size_t i = 0; i < source_fg.size(); ++i) {
      source_fg.data()[i] = r.source_raster.face.data()[i] >= 0 ? 1 : 0;
    }
    r.background = inpaint_background(in.source_image, source_fg);
  });
  stage("fusion", [&] {
    LayerSet layers{r.background, r.coarse_target, r.hand_layer, r.masks.hand, r.masks.foreground};
    r.final_image = fuse(layers);
  });
  return r;
}

}  // namespace topoflow
