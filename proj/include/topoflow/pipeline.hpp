#pragma once

// The full source -> unified -> target chain on one pair of scenes.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topoflow/compose.hpp"
#include "topoflow/error.hpp"
#include "topoflow/flow.hpp"
#include "topoflow/geometry.hpp"
#include "topoflow/raster.hpp"

namespace topoflow {

// Hand and object merged into one face index space: hand faces first, then
// object faces with vertex indices offset by the hand vertex count.
struct UnifiedModel {
  std::vector<Face> faces;
  std::vector<Instance> face_instance;
  int hand_faces = 0;
  int hand_vertices = 0;
  AtlasLayout layout;
  AtlasCorners atlas;                    // P^u, atlas pixels, per face
  std::vector<FaceUv> object_texture_uvs; // per object face
};

struct ModelOptions {
  int atlas_size = 1024;
  double atlas_margin = 1.0;
};

// Builds the atlas for `scene`'s topology. The hand always gets a grid atlas;
// the object keeps its OBJ UVs (placed into its sub-rectangle) when present.
UnifiedModel build_unified_model(const Scene& scene, const ModelOptions& options);

// Camera-frame vertices of the merged model (hand posed, object transformed).
std::vector<Vec3> posed_vertices(const Scene& scene);
ScreenCoords project_scene(const Scene& scene);

RasterBuffers rasterize_view(const Scene& scene, const UnifiedModel& model);
RasterBuffers rasterize_unified(const UnifiedModel& model);

struct PipelineOptions {
  ModelOptions model;
  int dilation_passes = kDefaultDilationPasses;
  bool skip_fusion = false;
};

struct PipelineInputs {
  Scene source;
  Scene target;
  Image source_image;
  std::optional<Image> object_texture;
};

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct PipelineResult {
  UnifiedModel model;
  RasterBuffers source_raster;
  RasterBuffers target_raster;
  RasterBuffers unified_raster;
  FlowField flow_us;
  VisibilityMask visibility;
  UnifiedTexture unified;
  FlowField flow_tu;
  Image coarse_target;
  TopologyMap topology;
  FusionMasks masks;
  FlowField flow_ts;
  Image hand_layer;
  Image background;
  std::optional<Image> final_image;
  std::vector<StageTiming> timings;
};

// A library error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), stage + ": " + cause.detail()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineOptions& options);

}  // namespace topoflow
