#include <algorithm>
#include <random>

#include "doctest.h"
#include "scenes.hpp"
#include "topoflow/error.hpp"
#include "topoflow/parallel.hpp"
#include "topoflow/pipeline.hpp"
#include "topoflow/synthetic.hpp"

using namespace topoflow;
using testing_support::channel_mae;

namespace {

PipelineResult run(const synthetic::DemoScene& demo, bool skip_fusion = false, int atlas = 1024) {
  PipelineOptions opt;
  opt.model.atlas_size = atlas;
  opt.skip_fusion = skip_fusion;
  return run_pipeline({demo.source, demo.target, demo.source_image, demo.object_texture}, opt);
}

double worst(const std::array<double, 3>& mae) { return *std::max_element(mae.begin(), mae.end()); }

}  // namespace

TEST_CASE("same pose reconstructs the source image") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 3; ++trial) {
    const auto demo = testing_support::random_same_pose_scene(rng, 160);
    const PipelineResult r = run(demo);
    REQUIRE(r.final_image.has_value());

    Mask mutual(160, 160, 0);
    for (std::size_t i = 0; i < mutual.size(); ++i) {
      mutual.data()[i] = r.masks.foreground.data()[i] && r.flow_ts.valid.data()[i];
    }
    CHECK(std::count(mutual.data().begin(), mutual.data().end(), 1) > 500);
    CHECK(worst(channel_mae(r.coarse_target, demo.source_image, mutual)) <= 3.0);
    CHECK(worst(channel_mae(*r.final_image, demo.source_image, Mask(160, 160, 1))) <= 4.0);

    // Outside the foreground the fused frame is the inpainted background,
    // which equals the source wherever the source shows background.
    for (std::size_t i = 0; i < mutual.size(); ++i) {
      if (r.masks.foreground.data()[i]) continue;
      CHECK(r.final_image->data()[i] == demo.source_image.data()[i]);
    }
  }
}

TEST_CASE("skipping fusion stops after the flows") {
  const auto demo = synthetic::make_demo_scene(true, 96);
  const PipelineResult r = run(demo, true, 512);
  CHECK_FALSE(r.final_image.has_value());
  CHECK(r.hand_layer.empty());
  CHECK(r.background.empty());
  CHECK(r.flow_ts.width() == 96);
  for (const auto& t : r.timings) CHECK(t.stage != "fusion");
  CHECK(r.timings.back().stage == "flow_ts");
}

TEST_CASE("novel pose: the object region follows the stored texture") {
  const auto demo = synthetic::make_demo_scene(true, 128);
  const PipelineResult r = run(demo);
  REQUIRE(r.final_image.has_value());
  Mask object(128, 128, 0);
  for (std::size_t i = 0; i < object.size(); ++i) {
    object.data()[i] = r.target_raster.instance.data()[i] == Instance::Object;
  }
  CHECK(std::count(object.data().begin(), object.data().end(), 1) > 500);
  CHECK(worst(channel_mae(*r.final_image, demo.target_render, object)) <= 4.0);
  CHECK(r.masks.hand != Mask(128, 128, 0));
}

TEST_CASE("pipeline output does not depend on the thread count") {
  const auto demo = synthetic::make_demo_scene(true, 96);
  set_max_threads(1);
  const PipelineResult a = run(demo, false, 512);
  set_max_threads(7);
  const PipelineResult b = run(demo, false, 512);
  set_max_threads(0);
  CHECK(*a.final_image == *b.final_image);
  CHECK(a.coarse_target == b.coarse_target);
  CHECK(a.flow_ts.vectors.data().size() == b.flow_ts.vectors.data().size());
  CHECK(a.flow_ts.valid == b.flow_ts.valid);
  for (std::size_t i = 0; i < a.flow_ts.valid.size(); ++i) {
    if (!a.flow_ts.valid.data()[i]) continue;
    CHECK(a.flow_ts.vectors.data()[i] == b.flow_ts.vectors.data()[i]);
  }
}

TEST_CASE("errors are tagged with the failing stage") {
  const auto demo = synthetic::make_demo_scene(false, 64);
  SUBCASE("source image of the wrong size") {
    try {
      run_pipeline({demo.source, demo.target, Image(10, 10), demo.object_texture}, {});
      FAIL("expected an error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "model");
      CHECK(e.code() == ErrorCode::SizeMismatch);
    }
  }
  SUBCASE("object without a texture") {
    try {
      run_pipeline({demo.source, demo.target, demo.source_image, std::nullopt}, {});
      FAIL("expected an error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "unified_texture");
      CHECK(e.code() == ErrorCode::MissingObjectTexture);
    }
  }
  SUBCASE("hand topology differs") {
    Scene target = demo.target;
    target.hand.faces.pop_back();
    try {
      run_pipeline({demo.source, target, demo.source_image, demo.object_texture}, {});
      FAIL("expected an error");
    } catch (const StageError& e) {
      CHECK(e.code() == ErrorCode::TopologyMismatch);
    }
  }
  SUBCASE("hand hidden in the source but shown in the target") {
    // A thin wall covers the whole source view and moves aside in the target.
    Scene source = demo.source;
    Scene target = demo.target;
    source.object = synthetic::make_box(Vec3(0.3, 0.3, 0.005));
    target.object = source.object;
    source.object_pose = {Mat3::Identity(), Vec3(0, 0, 0.2)};
    target.object_pose = {Mat3::Identity(), Vec3(3, 0, 1)};
    try {
      run_pipeline({source, target, demo.source_image, demo.object_texture}, {});
      FAIL("expected an error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "hand_stream");
      CHECK(e.code() == ErrorCode::NoVisibleHand);
    }
  }
}
