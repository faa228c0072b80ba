#include "topoflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "topoflow/error.hpp"
#include "topoflow/parallel.hpp"

namespace topoflow {
namespace {

constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();
constexpr int kRowGrain = 8;

std::uint8_t to_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

Rgba to_rgba(const std::array<double, 4>& c) {
  return {to_channel(c[0]), to_channel(c[1]), to_channel(c[2]), to_channel(c[3])};
}

void require_face_range(const Grid<std::int32_t>& face_map, std::size_t face_count,
                        ErrorCode code, const char* what) {
  for (const auto f : face_map.data()) {
    if (f >= 0 && static_cast<std::size_t>(f) >= face_count) {
      throw Error(code, std::string(what) + " missing for face " + std::to_string(f));
    }
  }
}

bool in_rect(const PixelRect& r, int x, int y) {
  return x >= r.x && y >= r.y && x < r.x + r.width && y < r.y + r.height;
}

}  // namespace

FlowField::FlowField(int width, int height)
    : vectors(width, height, Float2{kNaN, kNaN}), valid(width, height, 0) {}

void FlowField::set(int x, int y, double u, double v) {
  vectors(x, y) = {static_cast<float>(u), static_cast<float>(v)};
  valid(x, y) = 1;
}

std::size_t FlowField::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid.data().begin(), valid.data().end(), 1));
}

FlowField identity_flow(int width, int height) {
  FlowField flow(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) flow.set(x, y, x + 0.5, y + 0.5);
  }
  return flow;
}

bool TopologyMap::is_valid(int x, int y) const noexcept {
  return !std::isnan(values(x, y)[0]);
}

FlowField flow_unified_from_source(const RasterBuffers& u_raster, std::span<const Vec3> source_screen,
                                   std::span<const Face> faces) {
  require_face_range(u_raster.face, faces.size(), ErrorCode::IndexOutOfRange, "face definition");
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int idx : faces[f]) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= source_screen.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "face " + std::to_string(f) +
                                                    " references missing screen coordinate " +
                                                    std::to_string(idx));
      }
    }
  }

  const int w = u_raster.width();
  const int h = u_raster.height();
  FlowField flow(w, h);
  parallel_for(h, kRowGrain, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        const int f = u_raster.face(x, y);
        if (f < 0) continue;
        const Bary& wgt = u_raster.bary(x, y);
        double u = 0.0, v = 0.0;
        for (int k = 0; k < 3; ++k) {
          const Vec3& p = source_screen[faces[f][k]];
          u += static_cast<double>(wgt[k]) * p.x();
          v += static_cast<double>(wgt[k]) * p.y();
        }
        flow.set(x, y, u, v);
      }
    }
  });
  return flow;
}

VisibilityMask visibility_unified_from_source(const RasterBuffers& u_raster,
                                              const RasterBuffers& s_raster,
                                              const FlowField& flow) {
  if (!flow.vectors.same_shape(u_raster.face)) {
    throw Error(ErrorCode::SizeMismatch, "flow and unified raster sizes differ");
  }
  const int w = u_raster.width();
  const int h = u_raster.height();
  VisibilityMask visible(w, h, 0);
  parallel_for(h, kRowGrain, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!flow.is_valid(x, y)) continue;
        const auto [u, v] = flow.vectors(x, y);
        const double sx = std::floor(static_cast<double>(u));
        const double sy = std::floor(static_cast<double>(v));
        if (sx < 0.0 || sy < 0.0 || sx >= s_raster.width() || sy >= s_raster.height()) continue;
        const int fs = s_raster.face(static_cast<int>(sx), static_cast<int>(sy));
        visible(x, y) = fs >= 0 && fs == u_raster.face(x, y) ? 1 : 0;
      }
    }
  });
  return visible;
}

std::array<double, 4> sample_bilinear(const Image& image, double u, double v) {
  const double max_x = image.width() - 1.0;
  const double max_y = image.height() - 1.0;
  const double x = std::clamp(u - 0.5, 0.0, max_x);
  const double y = std::clamp(v - 0.5, 0.0, max_y);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, image.width() - 1);
  const int y1 = std::min(y0 + 1, image.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;

  const Rgba& p00 = image(x0, y0);
  const Rgba& p10 = image(x1, y0);
  const Rgba& p01 = image(x0, y1);
  const Rgba& p11 = image(x1, y1);
  std::array<double, 4> out{};
  for (int c = 0; c < 4; ++c) {
    const double top = p00[c] + fx * (p10[c] - p00[c]);
    const double bottom = p01[c] + fx * (p11[c] - p01[c]);
    out[c] = top + fy * (bottom - top);
  }
  return out;
}

Rgba sample_nearest(const Image& image, double u, double v) {
  const int x = static_cast<int>(std::clamp(std::floor(u), 0.0, image.width() - 1.0));
  const int y = static_cast<int>(std::clamp(std::floor(v), 0.0, image.height() - 1.0));
  return image(x, y);
}

void warp_into(const FlowField& flow, const Image& image, SampleMode mode, Image& out) {
  if (!out.same_shape(flow.vectors)) {
    throw Error(ErrorCode::SizeMismatch, "output " + std::to_string(out.width()) + "x" +
                                             std::to_string(out.height()) + " vs flow " +
                                             std::to_string(flow.width()) + "x" +
                                             std::to_string(flow.height()));
  }
  if (image.empty()) throw Error(ErrorCode::SizeMismatch, "cannot sample an empty image");
  const int w = flow.width();
  parallel_for(flow.height(), kRowGrain, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!flow.is_valid(x, y)) {
          out(x, y) = kTransparent;
          continue;
        }
        const auto [u, v] = flow.vectors(x, y);
        out(x, y) = mode == SampleMode::Nearest ? sample_nearest(image, u, v)
                                                : to_rgba(sample_bilinear(image, u, v));
      }
    }
  });
}

Image warp(const FlowField& flow, const Image& image, SampleMode mode) {
  Image out(flow.width(), flow.height(), kTransparent);
  warp_into(flow, image, mode, out);
  return out;
}

UnifiedTexture assemble_unified_texture(const Image& source_image, const FlowField& flow_us,
                                        const VisibilityMask& visibility,
                                        const RasterBuffers& u_raster, const AtlasLayout& layout,
                                        const ObjectTexture& object, int dilation_passes) {
  const int w = u_raster.width();
  const int h = u_raster.height();
  if (!flow_us.vectors.same_shape(u_raster.face) || !visibility.same_shape(u_raster.face)) {
    throw Error(ErrorCode::SizeMismatch, "unified-space inputs differ in size");
  }
  const bool has_object = std::any_of(u_raster.instance.data().begin(), u_raster.instance.data().end(),
                                      [](Instance i) { return i == Instance::Object; });
  if (has_object) {
    if (object.texture == nullptr || object.texture->empty()) {
      throw Error(ErrorCode::MissingObjectTexture, "atlas holds object faces but no texture");
    }
    for (std::size_t i = 0; i < u_raster.face.size(); ++i) {
      if (u_raster.instance.data()[i] != Instance::Object) continue;
      const int local = u_raster.face.data()[i] - object.first_face;
      if (local < 0 || static_cast<std::size_t>(local) >= object.face_texture_uvs.size()) {
        throw Error(ErrorCode::MissingUVs, "object face " + std::to_string(u_raster.face.data()[i]) +
                                               " has no texture coordinates");
      }
    }
  }
  const bool hand_source = !source_image.empty();

  UnifiedTexture tex{Image(w, h, kTransparent), Mask(w, h, 0), layout};
  parallel_for(h, kRowGrain, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        const int f = u_raster.face(x, y);
        if (f < 0) continue;
        if (u_raster.instance(x, y) == Instance::Hand) {
          if (!hand_source || !visibility(x, y) || !flow_us.is_valid(x, y)) continue;
          const auto [u, v] = flow_us.vectors(x, y);
          tex.image(x, y) = to_rgba(sample_bilinear(source_image, u, v));
          tex.filled(x, y) = 1;
        } else {
          const Bary& wgt = u_raster.bary(x, y);
          const FaceUv& uv = object.face_texture_uvs[static_cast<std::size_t>(f - object.first_face)];
          Vec2 t = Vec2::Zero();
          for (int k = 0; k < 3; ++k) t += static_cast<double>(wgt[k]) * uv[k];
          const Image& texture = *object.texture;
          tex.image(x, y) = to_rgba(
              sample_bilinear(texture, t.x() * texture.width(), (1.0 - t.y()) * texture.height()));
          tex.filled(x, y) = 1;
        }
      }
    }
  });
  dilate_unified_texture(tex, dilation_passes);
  return tex;
}

void dilate_unified_texture(UnifiedTexture& texture, int passes) {
  const int w = texture.image.width();
  const int h = texture.image.height();
  const std::array<PixelRect, 2> rects{texture.layout.hand.rect, texture.layout.object.rect};
  auto rect_of = [&](int x, int y) -> int {
    for (int r = 0; r < 2; ++r) {
      if (in_rect(rects[r], x, y)) return r;
    }
    return -1;
  };

  for (int pass = 0; pass < passes; ++pass) {
    const Image prev_image = texture.image;
    const Mask prev_filled = texture.filled;
    parallel_for(h, kRowGrain, [&](int y0, int y1) {
      for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < w; ++x) {
          if (prev_filled(x, y)) continue;
          const int r = rect_of(x, y);
          if (r < 0) continue;
          std::array<int, 4> sum{};
          int n = 0;
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int nx = x + dx;
              const int ny = y + dy;
              if ((dx == 0 && dy == 0) || !prev_filled.in_bounds(nx, ny)) continue;
              if (!prev_filled(nx, ny) || !in_rect(rects[r], nx, ny)) continue;
              for (int c = 0; c < 4; ++c) sum[c] += prev_image(nx, ny)[c];
              ++n;
            }
          }
          if (n == 0) continue;
          Rgba px{};
          for (int c = 0; c < 4; ++c) px[c] = static_cast<std::uint8_t>((sum[c] + n / 2) / n);
          texture.image(x, y) = px;
          texture.filled(x, y) = 1;
        }
      }
    });
  }
}

FlowField flow_target_from_unified(const RasterBuffers& t_raster, const AtlasCorners& atlas) {
  require_face_range(t_raster.face, atlas.size(), ErrorCode::MissingUVs, "atlas UVs");
  const int w = t_raster.width();
  FlowField flow(w, t_raster.height());
  parallel_for(t_raster.height(), kRowGrain, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        const int f = t_raster.face(x, y);
        if (f < 0) continue;
        const Bary& wgt = t_raster.bary(x, y);
        Vec2 q = Vec2::Zero();
        for (int k = 0; k < 3; ++k) q += static_cast<double>(wgt[k]) * atlas[f][k];
        flow.set(x, y, q.x(), q.y());
      }
    }
  });
  return flow;
}

Image synthesize_coarse_target(const FlowField& flow_tu, const UnifiedTexture& texture) {
  return warp(flow_tu, texture.image, SampleMode::Bilinear);
}

TopologyMap topology_map(const RasterBuffers& t_raster, const AtlasCorners& atlas) {
  require_face_range(t_raster.face, atlas.size(), ErrorCode::MissingUVs, "atlas UVs");
  TopologyMap map{Grid<Float2>(t_raster.width(), t_raster.height(), Float2{kNaN, kNaN})};
  for (int y = 0; y < t_raster.height(); ++y) {
    for (int x = 0; x < t_raster.width(); ++x) {
      const int f = t_raster.face(x, y);
      if (f < 0) continue;
      const Vec2 c = (atlas[f][0] + atlas[f][1] + atlas[f][2]) / 3.0;
      map.values(x, y) = {static_cast<float>(c.x()), static_cast<float>(c.y())};
    }
  }
  return map;
}

FlowField compose_flow_target_from_source(const FlowField& flow_tu, const FlowField& flow_us,
                                          const VisibilityMask& visibility_us,
                                          const RasterBuffers& u_raster) {
  if (!flow_us.vectors.same_shape(u_raster.face) || !visibility_us.same_shape(u_raster.face)) {
    throw Error(ErrorCode::LayoutMismatch,
                "unified-to-source flow, visibility and unified raster come from different atlases");
  }
  const int aw = u_raster.width();
  const int ah = u_raster.height();
  const int w = flow_tu.width();
  FlowField out(w, flow_tu.height());

  parallel_for(flow_tu.height(), kRowGrain, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!flow_tu.is_valid(x, y)) continue;
        const auto [qu, qv] = flow_tu.vectors(x, y);
        const double qx = qu;
        const double qy = qv;
        const double tx = std::floor(qx);
        const double ty = std::floor(qy);
        if (tx < 0.0 || ty < 0.0 || tx >= aw || ty >= ah) continue;
        const int ix = static_cast<int>(tx);
        const int iy = static_cast<int>(ty);
        const int face = u_raster.face(ix, iy);
        if (face < 0 || !flow_us.is_valid(ix, iy) || !visibility_us(ix, iy)) continue;

        // T_us is affine inside a face: bilinear over four same-face taps is exact.
        const double bx = qx - 0.5;
        const double by = qy - 0.5;
        const int x0 = static_cast<int>(std::floor(bx));
        const int y0b = static_cast<int>(std::floor(by));
        bool same_face = x0 >= 0 && y0b >= 0 && x0 + 1 < aw && y0b + 1 < ah;
        for (int k = 0; same_face && k < 4; ++k) {
          const int sx = x0 + (k & 1);
          const int sy = y0b + (k >> 1);
          same_face = u_raster.face(sx, sy) == face && flow_us.is_valid(sx, sy);
        }
        if (same_face) {
          const double fx = bx - x0;
          const double fy = by - y0b;
          std::array<double, 2> r{};
          for (int c = 0; c < 2; ++c) {
            const double v00 = flow_us.vectors(x0, y0b)[c];
            const double v10 = flow_us.vectors(x0 + 1, y0b)[c];
            const double v01 = flow_us.vectors(x0, y0b + 1)[c];
            const double v11 = flow_us.vectors(x0 + 1, y0b + 1)[c];
            const double top = v00 + fx * (v10 - v00);
            const double bottom = v01 + fx * (v11 - v01);
            r[c] = top + fy * (bottom - top);
          }
          out.set(x, y, r[0], r[1]);
        } else {
          // Straddling taps: extend the face's own affine map from the nearest
          // texel using one-sided differences with same-face neighbours.
          const auto same = [&](int sx, int sy) {
            return sx >= 0 && sy >= 0 && sx < aw && sy < ah && u_raster.face(sx, sy) == face &&
                   flow_us.is_valid(sx, sy);
          };
          const auto centre = flow_us.vectors(ix, iy);
          std::array<double, 2> dx{}, dy{};
          const int nx = same(ix + 1, iy) ? 1 : (same(ix - 1, iy) ? -1 : 0);
          const int ny = same(ix, iy + 1) ? 1 : (same(ix, iy - 1) ? -1 : 0);
          for (int c = 0; c < 2; ++c) {
            if (nx != 0) dx[c] = (static_cast<double>(flow_us.vectors(ix + nx, iy)[c]) - centre[c]) / nx;
            if (ny != 0) dy[c] = (static_cast<double>(flow_us.vectors(ix, iy + ny)[c]) - centre[c]) / ny;
          }
          const double ox = qx - (ix + 0.5);
          const double oy = qy - (iy + 0.5);
          out.set(x, y, centre[0] + dx[0] * ox + dy[0] * oy, centre[1] + dx[1] * ox + dy[1] * oy);
        }
      }
    }
  });
  return out;
}

}  // namespace topoflow
