#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "scenes.hpp"
#include "topoflow/compose.hpp"
#include "topoflow/error.hpp"
#include "topoflow/raster.hpp"

using namespace topoflow;

namespace {

// Object quad spanning the frame, hand triangle in front of part of it.
RasterBuffers hand_over_object(std::vector<Vec3>& screen, std::vector<Face>& faces,
                               std::vector<Instance>& labels) {
  screen = {Vec3(4, 4, 2), Vec3(60, 4, 2), Vec3(60, 60, 2), Vec3(4, 60, 2),
            Vec3(2, 2, 1), Vec3(50, 6, 1), Vec3(6, 50, 1)};
  faces = {{0, 1, 2}, {0, 2, 3}, {4, 5, 6}};
  labels = {Instance::Object, Instance::Object, Instance::Hand};
  return rasterize({screen, faces, labels}, 64, 64);
}

}  // namespace

TEST_CASE("analytic masks") {
  SUBCASE("empty scene") {
    const FusionMasks m = analytic_masks(make_empty_raster(8, 6));
    for (auto v : m.hand.data()) CHECK(v == 0);
    for (auto v : m.foreground.data()) CHECK(v == 0);
  }
  SUBCASE("hand only") {
    const std::vector<Vec3> s{Vec3(1, 1, 1), Vec3(15, 2, 1), Vec3(3, 14, 1)};
    const std::vector<Face> f{{0, 1, 2}};
    const std::vector<Instance> l{Instance::Hand};
    const FusionMasks m = analytic_masks(rasterize({s, f, l}, 16, 16));
    CHECK(m.hand == m.foreground);
    CHECK(std::count(m.hand.data().begin(), m.hand.data().end(), 1) > 50);
  }
  SUBCASE("hand occluding part of the object") {
    std::vector<Vec3> s;
    std::vector<Face> f;
    std::vector<Instance> l;
    const RasterBuffers rb = hand_over_object(s, f, l);
    const FusionMasks m = analytic_masks(rb);
    const auto ref = oracle::brute_force_raster(s, f, l, 64, 64);
    std::size_t object_px = 0, hand_px = 0;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const bool hand = ref.face(x, y) == 2;
        CHECK((m.hand(x, y) != 0) == hand);
        CHECK((m.foreground(x, y) != 0) == (ref.face(x, y) >= 0));
        if (m.hand(x, y)) CHECK(m.foreground(x, y));
        object_px += ref.face(x, y) == 0 || ref.face(x, y) == 1;
        hand_px += hand;
      }
    }
    // The hand hides a sizeable share of the object footprint.
    CHECK(static_cast<double>(hand_px) > 0.2 * static_cast<double>(object_px + hand_px));
  }
}

TEST_CASE("fuse examples") {
  std::mt19937_64 rng(11);
  LayerSet layers{testing_support::random_image(rng, 8, 8), testing_support::random_image(rng, 8, 8),
                  testing_support::random_image(rng, 8, 8), Mask(8, 8, 0), Mask(8, 8, 0)};
  SUBCASE("no foreground keeps the background") { CHECK(fuse(layers) == layers.background); }
  SUBCASE("all hand gives the hand layer") {
    layers.hand_mask = Mask(8, 8, 1);
    layers.foreground = Mask(8, 8, 1);
    CHECK(fuse(layers) == layers.hand);
  }
  SUBCASE("foreground without hand gives the object layer") {
    layers.foreground = Mask(8, 8, 1);
    CHECK(fuse(layers) == layers.object);
  }
  SUBCASE("random masks agree with the scalar formula") {
    for (int trial = 0; trial < 50; ++trial) {
      layers.hand_mask = testing_support::random_mask(rng, 8, 8);
      layers.foreground = testing_support::random_mask(rng, 8, 8);
      const Image out = fuse(layers);
      CHECK(out == oracle::scalar_fuse(layers.background, layers.object, layers.hand, layers.hand_mask,
                                       layers.foreground));
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          if (!layers.foreground(x, y)) CHECK(out(x, y) == layers.background(x, y));
        }
      }
    }
  }
  SUBCASE("layer sizes must agree") {
    layers.object = Image(8, 7);
    CHECK_THROWS_AS(fuse(layers), Error);
  }
}

TEST_CASE("background inpainting") {
  SUBCASE("constant field is filled with the same colour") {
    const Image flat(20, 12, {90, 120, 30, 255});
    Mask hole(20, 12, 0);
    for (int y = 3; y < 9; ++y) {
      for (int x = 5; x < 14; ++x) hole(x, y) = 1;
    }
    CHECK(inpaint_background(flat, hole) == flat);
  }
  SUBCASE("empty mask is a no-op") {
    std::mt19937_64 rng(1);
    const Image img = testing_support::random_image(rng, 9, 7);
    CHECK(inpaint_background(img, Mask(9, 7, 0)) == img);
  }
  SUBCASE("horizontal gradient with a 5 px hole") {
    Image grad(40, 20);
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 40; ++x) grad(x, y) = {static_cast<std::uint8_t>(5 * x), 40, 200, 255};
    }
    Mask hole(40, 20, 0);
    for (int y = 8; y < 13; ++y) {
      for (int x = 18; x < 23; ++x) hole(x, y) = 1;
    }
    Image damaged = grad;
    for (int y = 8; y < 13; ++y) {
      for (int x = 18; x < 23; ++x) damaged(x, y) = {0, 0, 0, 0};
    }
    const Image out = inpaint_background(damaged, hole);
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 40; ++x) {
        if (!hole(x, y)) {
          CHECK(out(x, y) == grad(x, y));
          continue;
        }
        for (int c = 0; c < 4; ++c) CHECK(std::abs(out(x, y)[c] - grad(x, y)[c]) <= 10);
      }
    }
  }
  SUBCASE("idempotent once the holes are gone") {
    std::mt19937_64 rng(2);
    const Image img = testing_support::random_image(rng, 16, 16);
    const Mask mask = testing_support::random_mask(rng, 16, 16);
    const Image once = inpaint_background(img, mask);
    CHECK(inpaint_background(once, Mask(16, 16, 0)) == once);
  }
  SUBCASE("all foreground") {
    CHECK_THROWS_AS(inpaint_background(Image(4, 4), Mask(4, 4, 1)), Error);
    try {
      inpaint_background(Image(4, 4), Mask(4, 4, 1));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::AllForeground);
    }
  }
}

TEST_CASE("hand hole filling") {
  // Two hand faces sharing the diagonal of a 16 px square.
  const std::vector<Vec3> s{Vec3(0, 0, 1), Vec3(16, 0, 1), Vec3(16, 16, 1), Vec3(0, 16, 1)};
  const std::vector<Face> f{{0, 1, 2}, {0, 2, 3}};
  const std::vector<Instance> l{Instance::Hand, Instance::Hand};
  const RasterBuffers rb = rasterize({s, f, l}, 16, 16);

  SUBCASE("fully visible hand is untouched") {
    std::mt19937_64 rng(4);
    const Image img = testing_support::random_image(rng, 16, 16);
    CHECK(fill_hand_holes(img, rb, Mask(16, 16, 1)) == img);
  }
  SUBCASE("invisible face falls back to the global mean") {
    Image img(16, 16, {128, 128, 128, 255});
    Mask valid(16, 16, 0);
    for (int i = 0; i < 256; ++i) {
      if (rb.face.data()[i] == 0) continue;
      valid.data()[i] = 1;
      img.data()[i] = {128, 128, 128, 255};
    }
    for (int i = 0; i < 256; ++i) {
      if (!valid.data()[i]) img.data()[i] = {0, 0, 0, 0};
    }
    const Image out = fill_hand_holes(img, rb, valid);
    for (const auto& p : out.data()) CHECK(p == Rgba{128, 128, 128, 255});
  }
  SUBCASE("half-occluded face takes the mean of its two-tone valid pixels") {
    Image img(16, 16, {0, 0, 0, 0});
    Mask valid(16, 16, 0);
    std::array<double, 4> sum{};
    int n = 0;
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        if (rb.face(x, y) != 0 || x < 8) continue;
        valid(x, y) = 1;
        img(x, y) = (x + y) % 2 ? Rgba{200, 10, 50, 255} : Rgba{20, 110, 250, 255};
        for (int c = 0; c < 4; ++c) sum[c] += img(x, y)[c];
        ++n;
      }
    }
    const Image out = fill_hand_holes(img, rb, valid);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        if (valid(x, y)) {
          CHECK(out(x, y) == img(x, y));
        } else if (rb.face(x, y) == 0) {
          for (int c = 0; c < 4; ++c) CHECK(std::abs(out(x, y)[c] - sum[c] / n) <= 1.0);
        }
      }
    }
  }
  SUBCASE("no valid hand pixel") {
    try {
      fill_hand_holes(Image(16, 16), rb, Mask(16, 16, 0));
      FAIL("expected NoVisibleHand");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoVisibleHand);
    }
  }
}
