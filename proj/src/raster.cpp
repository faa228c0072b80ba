#include "topoflow/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "topoflow/error.hpp"
#include "topoflow/parallel.hpp"

namespace topoflow {
namespace {

constexpr int kBandRows = 16;
constexpr float kInf = std::numeric_limits<float>::infinity();

double edge_fn(const Vec2& p0, const Vec2& p1, double px, double py) {
  return (p1.x() - p0.x()) * (py - p0.y()) - (p1.y() - p0.y()) * (px - p0.x());
}

// Top-left rule for a triangle with positive edge_fn interior in y-down
// coordinates: top edges run in +x with dy == 0, left edges have dy < 0.
bool is_top_left(const Vec2& p0, const Vec2& p1) {
  const double dx = p1.x() - p0.x();
  const double dy = p1.y() - p0.y();
  return dy < 0.0 || (dy == 0.0 && dx > 0.0);
}

bool covers(double e, bool top_left) { return e > 0.0 || (e == 0.0 && top_left); }

struct Setup {
  int face = 0;
  // Vertices in an order with positive doubled area; slot[k] is the original
  // corner index of oriented vertex k.
  std::array<Vec2, 3> v;
  std::array<double, 3> z{};
  std::array<int, 3> slot{};
  std::array<bool, 3> top_left{};
  double area2 = 0.0;
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive pixel bounds
  Instance instance = Instance::Object;
};

}  // namespace

RasterBuffers make_empty_raster(int width, int height) {
  RasterBuffers rb;
  rb.face = Grid<std::int32_t>(width, height, kNoFace);
  rb.bary = Grid<Bary>(width, height, Bary{0.f, 0.f, 0.f});
  rb.depth = Grid<float>(width, height, kInf);
  rb.instance = Grid<Instance>(width, height, Instance::Background);
  return rb;
}

std::array<double, 3> barycentric(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area2 = edge_fn(a, b, c.x(), c.y());
  if (!(std::abs(area2) > kDegenerateArea)) {
    throw Error(ErrorCode::DegenerateTriangle,
                "triangle area " + std::to_string(std::abs(area2)) + " below threshold");
  }
  const double wa = edge_fn(b, c, p.x(), p.y()) / area2;
  const double wb = edge_fn(c, a, p.x(), p.y()) / area2;
  return {wa, wb, 1.0 - wa - wb};
}

RasterBuffers rasterize(const RasterInput& input, int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::SizeMismatch, "raster size must be at least 1x1");
  }
  if (input.instance.size() != input.faces.size()) {
    throw Error(ErrorCode::SizeMismatch, "instance labels must match the face count");
  }
  const auto n_vertices = static_cast<long long>(input.screen.size());

  std::vector<Setup> setups;
  setups.reserve(input.faces.size());
  for (std::size_t f = 0; f < input.faces.size(); ++f) {
    const Face& face = input.faces[f];
    for (int idx : face) {
      if (idx < 0 || idx >= n_vertices) {
        throw Error(ErrorCode::IndexOutOfRange, "face " + std::to_string(f) +
                                                    " references missing vertex " +
                                                    std::to_string(idx));
      }
    }
    Setup s;
    s.face = static_cast<int>(f);
    s.instance = input.instance[f];
    s.slot = {0, 1, 2};
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = input.screen[face[k]];
      s.v[k] = Vec2(p.x(), p.y());
      s.z[k] = p.z();
    }
    s.area2 = edge_fn(s.v[0], s.v[1], s.v[2].x(), s.v[2].y());
    if (!(std::abs(s.area2) > kDegenerateArea)) continue;
    if (s.area2 < 0.0) {
      std::swap(s.v[1], s.v[2]);
      std::swap(s.z[1], s.z[2]);
      std::swap(s.slot[1], s.slot[2]);
      s.area2 = -s.area2;
    }
    for (int k = 0; k < 3; ++k) s.top_left[k] = is_top_left(s.v[k], s.v[(k + 1) % 3]);

    const double min_x = std::min({s.v[0].x(), s.v[1].x(), s.v[2].x()});
    const double max_x = std::max({s.v[0].x(), s.v[1].x(), s.v[2].x()});
    const double min_y = std::min({s.v[0].y(), s.v[1].y(), s.v[2].y()});
    const double max_y = std::max({s.v[0].y(), s.v[1].y(), s.v[2].y()});
    // Pixel centres x + 0.5 inside [min, max].
    s.x0 = static_cast<int>(std::max(std::ceil(min_x - 0.5), 0.0));
    s.x1 = static_cast<int>(std::min(std::floor(max_x - 0.5), width - 1.0));
    s.y0 = static_cast<int>(std::max(std::ceil(min_y - 0.5), 0.0));
    s.y1 = static_cast<int>(std::min(std::floor(max_y - 0.5), height - 1.0));
    if (s.x0 > s.x1 || s.y0 > s.y1) continue;
    setups.push_back(s);
  }

  RasterBuffers rb = make_empty_raster(width, height);
  const int bands = (height + kBandRows - 1) / kBandRows;

  parallel_for(bands, 1, [&](int band_begin, int band_end) {
    std::vector<double> best(static_cast<std::size_t>(width) * kBandRows);
    for (int band = band_begin; band < band_end; ++band) {
      const int row0 = band * kBandRows;
      const int row1 = std::min(row0 + kBandRows, height) - 1;
      std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());

      for (const Setup& s : setups) {
        const int ya = std::max(s.y0, row0);
        const int yb = std::min(s.y1, row1);
        for (int y = ya; y <= yb; ++y) {
          const double py = y + 0.5;
          for (int x = s.x0; x <= s.x1; ++x) {
            const double px = x + 0.5;
            const double e0 = edge_fn(s.v[1], s.v[2], px, py);  // weight of v0
            const double e1 = edge_fn(s.v[2], s.v[0], px, py);  // weight of v1
            const double e2 = edge_fn(s.v[0], s.v[1], px, py);  // weight of v2
            if (!covers(e0, s.top_left[1]) || !covers(e1, s.top_left[2]) ||
                !covers(e2, s.top_left[0])) {
              continue;
            }
            const double w0 = e0 / s.area2;
            const double w1 = e1 / s.area2;
            const double w2 = e2 / s.area2;
            const double z = w0 * s.z[0] + w1 * s.z[1] + w2 * s.z[2];
            double& slot_best = best[static_cast<std::size_t>(y - row0) * width + x];
            // Faces arrive in increasing index order, so strict < keeps the
            // lower index on equal depth.
            if (!(z < slot_best)) continue;
            slot_best = z;
            rb.face(x, y) = s.face;
            rb.depth(x, y) = static_cast<float>(z);
            rb.instance(x, y) = s.instance;
            Bary bary{};
            bary[s.slot[0]] = static_cast<float>(w0);
            bary[s.slot[1]] = static_cast<float>(w1);
            bary[s.slot[2]] = static_cast<float>(w2);
            rb.bary(x, y) = bary;
          }
        }
      }
    }
  });
  return rb;
}

}  // namespace topoflow
