#include <algorithm>
#include <cmath>
#include <string>

#include "topoflow/error.hpp"
#include "topoflow/geometry.hpp"

namespace topoflow {

AtlasLayout AtlasLayout::split(int atlas_size) {
  AtlasLayout layout;
  layout.atlas_size = atlas_size;
  const int half = atlas_size / 2;
  layout.hand.rect = {0, 0, half, atlas_size};
  layout.object.rect = {half, 0, atlas_size - half, atlas_size};
  return layout;
}

GridAtlas build_grid_atlas(const Mesh& mesh, const GridAtlasParams& params) {
  const auto n_faces = static_cast<int>(mesh.faces.size());
  if (n_faces == 0) throw Error(ErrorCode::EmptyMesh, "grid atlas needs at least one face");

  const auto per_row = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_faces))));
  const PixelRect& rect = params.rect;
  // Square cells; at most per_row rows are used.
  const double cell = std::min(rect.width, rect.height) / static_cast<double>(per_row);
  const double m = params.margin;
  if (cell - 2.0 * m < 2.0) {
    throw Error(ErrorCode::CellTooSmall, "cell side " + std::to_string(cell) + " px with margin " +
                                             std::to_string(m) + " px leaves less than 2 px");
  }

  GridAtlas out;
  out.placement = {rect, per_row, cell, m};
  out.face_uvs.reserve(static_cast<std::size_t>(n_faces));
  for (int f = 0; f < n_faces; ++f) {
    const double ox = rect.x + (f % per_row) * cell;
    const double oy = rect.y + (f / per_row) * cell;
    out.face_uvs.push_back({atlas_px_to_uv({ox + m, oy + m}, params.atlas_size),
                            atlas_px_to_uv({ox + cell - m, oy + m}, params.atlas_size),
                            atlas_px_to_uv({ox + m, oy + cell - m}, params.atlas_size)});
  }
  return out;
}

std::vector<FaceUv> place_uvs_in_rect(const std::vector<FaceUv>& uvs, const PixelRect& rect,
                                      int atlas_size) {
  std::vector<FaceUv> out;
  out.reserve(uvs.size());
  for (const auto& tri : uvs) {
    FaceUv placed;
    for (int k = 0; k < 3; ++k) {
      const Vec2 px{rect.x + tri[k].x() * rect.width, rect.y + (1.0 - tri[k].y()) * rect.height};
      placed[k] = atlas_px_to_uv(px, atlas_size);
    }
    out.push_back(placed);
  }
  return out;
}

}  // namespace topoflow
