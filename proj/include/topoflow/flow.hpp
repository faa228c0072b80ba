#pragma once

// Flow fields between the source view, the unified surface space (atlas) and
// the target view, plus the texture transfer built on them.
//
// All coordinates stored in flows are continuous pixel coordinates of the
// destination space (pixel centres at +0.5).

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "topoflow/geometry.hpp"
#include "topoflow/grid.hpp"
#include "topoflow/raster.hpp"

namespace topoflow {

using Float2 = std::array<float, 2>;

// Per-pixel destination coordinates; NaN exactly where valid == 0.
struct FlowField {
  Grid<Float2> vectors;
  Mask valid;

  FlowField() = default;
  FlowField(int width, int height);

  int width() const noexcept { return vectors.width(); }
  int height() const noexcept { return vectors.height(); }
  bool is_valid(int x, int y) const noexcept { return valid(x, y) != 0; }
  void set(int x, int y, double u, double v);
  std::size_t valid_count() const noexcept;
};

// Identity flow: every pixel maps to its own centre.
FlowField identity_flow(int width, int height);

// true = texel visible from the source view.
using VisibilityMask = Mask;

struct UnifiedTexture {
  Image image;
  Mask filled;
  AtlasLayout layout;
};

// Unified-space barycentre of the face visible at each target pixel, in
// atlas pixel coordinates; NaN at background.
struct TopologyMap {
  Grid<Float2> values;

  int width() const noexcept { return values.width(); }
  int height() const noexcept { return values.height(); }
  bool is_valid(int x, int y) const noexcept;
};

// Per-face corner positions in atlas pixel coordinates (P^u).
using AtlasCorners = std::vector<std::array<Vec2, 3>>;

// T_{u<-s}(x,y) = sum_i W^u_i(x,y) * P^s(vertex i of F^u(x,y)).
// Throws IndexOutOfRange when a face references a missing screen coordinate.
FlowField flow_unified_from_source(const RasterBuffers& u_raster, std::span<const Vec3> source_screen,
                                   std::span<const Face> faces);

// Texel visible iff its flow is valid, lands on an in-bounds source pixel and
// the source face map there names the same face.
VisibilityMask visibility_unified_from_source(const RasterBuffers& u_raster,
                                              const RasterBuffers& s_raster,
                                              const FlowField& flow);

enum class SampleMode { Nearest, Bilinear };

// Bilinear sample with border clamping; channel values stay in [0, 255].
std::array<double, 4> sample_bilinear(const Image& image, double u, double v);
Rgba sample_nearest(const Image& image, double u, double v);

// out(x,y) = sample(image, flow(x,y)) where valid, transparent elsewhere.
Image warp(const FlowField& flow, const Image& image, SampleMode mode);
// Same, writing into a preallocated image; SizeMismatch unless out matches
// the flow's size.
void warp_into(const FlowField& flow, const Image& image, SampleMode mode, Image& out);

// Pre-stored object appearance: texture image plus one texture-UV triplet
// (OBJ convention) per object face. Object faces occupy the combined face
// index range [first_face, first_face + face_texture_uvs.size()).
struct ObjectTexture {
  const Image* texture = nullptr;
  std::span<const FaceUv> face_texture_uvs;
  int first_face = 0;
};

inline constexpr int kDefaultDilationPasses = 2;

// Hand texels take the visible source appearance; object texels are filled
// from the pre-stored texture only. Then `dilation_passes` rounds of
// neighbour-mean dilation grow the filled region within each sub-rectangle.
// Throws MissingObjectTexture if the atlas holds object faces but `object`
// has no texture.
UnifiedTexture assemble_unified_texture(const Image& source_image, const FlowField& flow_us,
                                        const VisibilityMask& visibility,
                                        const RasterBuffers& u_raster, const AtlasLayout& layout,
                                        const ObjectTexture& object,
                                        int dilation_passes = kDefaultDilationPasses);

// One round = every unfilled texel with at least one filled 8-neighbour in
// the same sub-rectangle takes the rounded mean of those neighbours.
void dilate_unified_texture(UnifiedTexture& texture, int passes);

// T_{t<-u}(x,y) = sum_i W^t_i(x,y) * P^u_i(F^t(x,y)).
// Throws MissingUVs when a rasterized face has no atlas corners.
FlowField flow_target_from_unified(const RasterBuffers& t_raster, const AtlasCorners& atlas);

// Warp(T_{t<-u}, I_u) with bilinear sampling.
Image synthesize_coarse_target(const FlowField& flow_tu, const UnifiedTexture& texture);

// Y_t(x,y) = centroid of the atlas triangle of F^t(x,y).
TopologyMap topology_map(const RasterBuffers& t_raster, const AtlasCorners& atlas);

// Target -> source flow through the atlas. The nearest atlas texel decides
// validity (T_{u<-s} valid and visible there); the source coordinate is the
// bilinear interpolation of T_{u<-s} when all four taps belong to that
// texel's face, else the nearest texel's value extended by one-sided same-face
// differences.
// Throws LayoutMismatch when the unified-space inputs disagree in size.
FlowField compose_flow_target_from_source(const FlowField& flow_tu, const FlowField& flow_us,
                                          const VisibilityMask& visibility_us,
                                          const RasterBuffers& u_raster);

}  // namespace topoflow
