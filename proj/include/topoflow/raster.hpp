#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "topoflow/geometry.hpp"
#include "topoflow/grid.hpp"

namespace topoflow {

using Bary = std::array<float, 3>;

inline constexpr int kNoFace = -1;

// Per-pixel outputs of one rasterization. face == -1 <=> depth == +inf <=>
// instance == Background.
struct RasterBuffers {
  Grid<std::int32_t> face;
  Grid<Bary> bary;
  Grid<float> depth;
  Grid<Instance> instance;

  int width() const noexcept { return face.width(); }
  int height() const noexcept { return face.height(); }
};

RasterBuffers make_empty_raster(int width, int height);

// Barycentric coordinates of p with respect to (a, b, c).
// Throws DegenerateTriangle when |cross(b - a, c - a)| <= 1e-12.
std::array<double, 3> barycentric(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c);

struct RasterInput {
  std::span<const Vec3> screen;       // x, y in pixels, z = depth
  std::span<const Face> faces;
  std::span<const Instance> instance; // one per face
};

// Pixel-centre coverage with the top-left fill rule, linear screen-space
// depth, lower face index wins equal depths, no culling. Triangles whose
// screen area is <= 1e-12 are skipped. Output is bit-identical for any
// thread count.
RasterBuffers rasterize(const RasterInput& input, int width, int height);

}  // namespace topoflow
