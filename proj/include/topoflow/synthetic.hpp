#pragma once

// Procedural desk-scale scenes: a UV-mapped box "object", a low-poly
// articulated "hand", smooth procedural textures, and a direct renderer that
// shades them without going through the unified space. Used by the demo
// subcommand and by the test suites.

#include <array>
#include <cstdint>
#include <vector>

#include "topoflow/geometry.hpp"
#include "topoflow/grid.hpp"
#include "topoflow/raster.hpp"

namespace topoflow::synthetic {

// Axis-aligned box centred at the origin, 12 outward-wound triangles, each
// side mapped to one cell of a 3x2 texture layout (inset by `uv_inset`).
Mesh make_box(const Vec3& half_extents, double uv_inset = 0.02);

struct HandPose {
  RigidTransform root;                  // palm frame -> camera frame
  std::array<double, 5> curl{};         // per finger, radians per joint
  std::array<double, 5> spread{};       // per finger, radians about z
};

// Palm box plus five three-segment fingers: 16 boxes, 192 faces. Topology
// does not depend on the pose.
Mesh make_hand(const HandPose& pose);

inline constexpr int kHandFaces = 192;

// Rotation from an axis-angle vector (radians).
Mat3 rotation(const Vec3& axis_angle);

// Smooth, structured RGBA texture (opaque).
Image make_texture(int width, int height, std::uint32_t seed);
// Smooth opaque background.
Image make_background(int width, int height);

// Per-vertex colours for the hand, derived from the vertex index so they do
// not change with the pose.
std::vector<Rgba> hand_vertex_colors(std::size_t vertex_count);

struct RenderInputs {
  const Scene* scene = nullptr;
  const Image* object_texture = nullptr;   // sampled through object face_uvs
  const Image* background = nullptr;
  std::vector<Rgba> hand_colors;           // per hand vertex
};

struct Rendering {
  Image image;
  RasterBuffers raster;
};

// Shades every pixel directly: hand by interpolated vertex colours, object by
// bilinear texture lookup at interpolated UVs, background from `background`.
Rendering render(const RenderInputs& inputs);

struct DemoScene {
  Scene source;
  Scene target;
  Image object_texture;
  Image source_image;
  Image target_render;  // direct render of the target pose
};

// Textured box plus articulated hand; `novel_pose` false makes the target
// identical to the source.
DemoScene make_demo_scene(bool novel_pose, int image_size = 256);

}  // namespace topoflow::synthetic
