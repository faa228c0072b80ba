#include "topoflow/compose.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "topoflow/error.hpp"
#include "topoflow/parallel.hpp"

namespace topoflow {
namespace {

constexpr int kRowGrain = 8;

struct ColorSum {
  std::array<long long, 4> sum{};
  long long count = 0;

  void add(const Rgba& p) {
    for (int c = 0; c < 4; ++c) sum[c] += p[c];
    ++count;
  }
  Rgba mean() const {
    Rgba out{};
    for (int c = 0; c < 4; ++c) out[c] = static_cast<std::uint8_t>((sum[c] + count / 2) / count);
    return out;
  }
};

}  // namespace

FusionMasks analytic_masks(const RasterBuffers& t_raster) {
  const int w = t_raster.width();
  const int h = t_raster.height();
  FusionMasks masks{Mask(w, h, 0), Mask(w, h, 0)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      masks.foreground(x, y) = t_raster.face(x, y) >= 0 ? 1 : 0;
      masks.hand(x, y) = t_raster.instance(x, y) == Instance::Hand ? 1 : 0;
    }
  }
  return masks;
}

Image fuse(const LayerSet& layers) {
  const int w = layers.background.width();
  const int h = layers.background.height();
  const bool same = layers.object.same_shape(w, h) && layers.hand.same_shape(w, h) &&
                    layers.hand_mask.same_shape(w, h) && layers.foreground.same_shape(w, h);
  if (!same) throw Error(ErrorCode::SizeMismatch, "fusion layers differ in size");

  Image out(w, h, kTransparent);
  parallel_for(h, kRowGrain, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        const int mh = layers.hand_mask(x, y) ? 1 : 0;
        const int mf = layers.foreground(x, y) ? 1 : 0;
        const Rgba& ih = layers.hand(x, y);
        const Rgba& io = layers.object(x, y);
        const Rgba& ib = layers.background(x, y);
        Rgba& px = out(x, y);
        for (int c = 0; c < 4; ++c) {
          const int v = (ih[c] * mh + io[c] * (1 - mh)) * mf + ib[c] * (1 - mf);
          px[c] = static_cast<std::uint8_t>(v);
        }
      }
    }
  });
  return out;
}

Image inpaint_background(const Image& source, const Mask& foreground) {
  const int w = source.width();
  const int h = source.height();
  if (!foreground.same_shape(source)) {
    throw Error(ErrorCode::SizeMismatch, "foreground mask and source image differ in size");
  }
  Mask known(w, h, 0);
  std::size_t holes = 0;
  for (std::size_t i = 0; i < known.size(); ++i) {
    known.data()[i] = foreground.data()[i] ? 0 : 1;
    holes += foreground.data()[i] ? 1 : 0;
  }
  Image out = source;
  if (holes == 0) return out;
  if (holes == known.size()) throw Error(ErrorCode::AllForeground, "no background pixel to propagate");

  while (holes > 0) {
    const Mask before = known;
    const Image snapshot = out;
    parallel_for(h, kRowGrain, [&](int y0, int y1) {
      for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < w; ++x) {
          if (before(x, y)) continue;
          ColorSum acc;
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              if (dx == 0 && dy == 0) continue;
              if (before.in_bounds(x + dx, y + dy) && before(x + dx, y + dy)) {
                acc.add(snapshot(x + dx, y + dy));
              }
            }
          }
          if (acc.count == 0) continue;
          out(x, y) = acc.mean();
          known(x, y) = 1;
        }
      }
    });
    std::size_t remaining = 0;
    for (const auto k : known.data()) remaining += k ? 0 : 1;
    // 8-connected grid with at least one known pixel always progresses.
    holes = remaining;
  }
  return out;
}

Image fill_hand_holes(const Image& coarse_hand, const RasterBuffers& t_raster, const Mask& valid) {
  const int w = coarse_hand.width();
  const int h = coarse_hand.height();
  if (!t_raster.face.same_shape(w, h) || !valid.same_shape(w, h)) {
    throw Error(ErrorCode::SizeMismatch, "hand layer, raster and validity differ in size");
  }

  std::int32_t max_face = -1;
  for (const auto f : t_raster.face.data()) max_face = std::max(max_face, f);
  std::vector<ColorSum> per_face(static_cast<std::size_t>(max_face + 1));
  ColorSum global;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (t_raster.instance(x, y) != Instance::Hand || !valid(x, y)) continue;
      per_face[static_cast<std::size_t>(t_raster.face(x, y))].add(coarse_hand(x, y));
      global.add(coarse_hand(x, y));
    }
  }
  if (global.count == 0) throw Error(ErrorCode::NoVisibleHand, "no hand pixel has source texture");

  const Rgba fallback = global.mean();
  Image out = coarse_hand;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (t_raster.instance(x, y) != Instance::Hand || valid(x, y)) continue;
      const ColorSum& face = per_face[static_cast<std::size_t>(t_raster.face(x, y))];
      out(x, y) = face.count > 0 ? face.mean() : fallback;
    }
  }
  return out;
}

}  // namespace topoflow
