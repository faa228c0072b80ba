#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "doctest.h"
#include "scenes.hpp"
#include "topoflow/error.hpp"
#include "topoflow/io.hpp"
#include "topoflow/synthetic.hpp"

using namespace topoflow;
using testing_support::TempDir;
using testing_support::write_file;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::ParseError;
}

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
  const std::string s = testing_support::read_file(p);
  return {s.begin(), s.end()};
}

// Bit patterns, so NaN positions compare too.
std::vector<std::uint32_t> bits(const std::vector<float>& v) {
  std::vector<std::uint32_t> out;
  for (float f : v) out.push_back(std::bit_cast<std::uint32_t>(f));
  return out;
}

FlowField random_flow(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(-100.0, 600.0);
  std::bernoulli_distribution keep(0.7);
  FlowField f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (keep(rng)) f.set(x, y, u(rng), u(rng));
    }
  }
  return f;
}

const char* kTriangleObj = "v 0 0 0\nv 0.1 0 0\nv 0 0.1 0\nf 1 2 3\n";
const char* kQuadObj = "v 0 0 0\nv 0.1 0 0\nv 0.1 0.1 0\nv 0 0.1 0\nf 1 2 3 4\n";

}  // namespace

TEST_CASE("TFLO byte layout") {
  TempDir dir("io_layout");
  FlowField one(1, 1);
  one.set(0, 0, 2.0, 3.0);
  io::write_tflo(one, dir / "one.tflo");
  const auto b = file_bytes(dir / "one.tflo");
  REQUIRE(b.size() == 28);
  CHECK(std::string(b.begin(), b.begin() + 4) == "TFLO");
  CHECK(b[4] == 1);
  CHECK(b[8] == 1);
  CHECK(b[12] == 1);
  CHECK(b[16] == 2);
  const std::vector<std::uint8_t> payload(b.begin() + 20, b.end());
  CHECK(payload == std::vector<std::uint8_t>{0x00, 0x00, 0x00, 0x40, 0x00, 0x00, 0x40, 0x40});

  io::write_tflo(FlowField(64, 64), dir / "big.tflo");
  CHECK(std::filesystem::file_size(dir / "big.tflo") == 20 + 32768);

  TopologyMap map{Grid<Float2>(3, 2, Float2{1.0f, 2.0f})};
  io::write_tmap(map, dir / "map.tmap");
  const auto m = file_bytes(dir / "map.tmap");
  CHECK(std::string(m.begin(), m.begin() + 4) == "TMAP");
  CHECK(m.size() == 20 + 3 * 2 * 2 * 4);

  Grid<float> depth(5, 4, 1.5f);
  io::write_tflo(depth, dir / "depth.tflo");
  const auto d = file_bytes(dir / "depth.tflo");
  CHECK(d[16] == 1);
  CHECK(d.size() == 20 + 5 * 4 * 4);
}

TEST_CASE("TFLO round trips keep NaN positions") {
  TempDir dir("io_roundtrip");
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const FlowField f = random_flow(rng, 32, 32);
    io::write_tflo(f, dir / "f.tflo");
    const FlowField back = io::to_flow(io::read_field(dir / "f.tflo"));
    CHECK(back.valid == f.valid);
    CHECK(bits(io::to_field(back).values) == bits(io::to_field(f).values));
  }
  Grid<float> depth(7, 3, std::numeric_limits<float>::infinity());
  depth(2, 1) = 0.25f;
  io::write_tflo(depth, dir / "d.tflo");
  CHECK(io::to_depth(io::read_field(dir / "d.tflo")) == depth);

  TopologyMap map{Grid<Float2>(4, 4, Float2{std::nanf(""), std::nanf("")})};
  map.values(1, 2) = {10.5f, 20.25f};
  io::write_tmap(map, dir / "m.tmap");
  const auto field = io::read_field(dir / "m.tmap");
  CHECK(field.kind == io::FieldKind::Topology);
  const TopologyMap back = io::to_topology(field);
  CHECK(back.is_valid(1, 2));
  CHECK_FALSE(back.is_valid(0, 0));
  CHECK(back.values(1, 2) == Float2{10.5f, 20.25f});
}

TEST_CASE("TFLO decoding errors") {
  FlowField f(4, 3);
  f.set(1, 1, 5.0, 6.0);
  const auto good = io::encode_field(io::to_field(f));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(code_of([&] { io::decode_field(bad_magic); }) == ErrorCode::BadMagic);

  auto short_payload = good;
  short_payload.resize(good.size() - 4);
  CHECK(code_of([&] { io::decode_field(short_payload); }) == ErrorCode::TruncatedPayload);

  auto short_header = good;
  short_header.resize(12);
  CHECK(code_of([&] { io::decode_field(short_header); }) == ErrorCode::TruncatedPayload);

  auto v2 = good;
  v2[4] = 2;
  CHECK(code_of([&] { io::decode_field(v2); }) == ErrorCode::UnsupportedVersion);

  CHECK(code_of([&] { io::to_flow(io::to_field(Grid<float>(2, 2))); }) == ErrorCode::SizeMismatch);
  CHECK(code_of([&] { io::read_field("/nonexistent/dir/x.tflo"); }) == ErrorCode::FileNotFound);
}

TEST_CASE("PNG round trips") {
  TempDir dir("io_png");
  std::mt19937_64 rng(9);
  const Image img = testing_support::random_image(rng, 31, 17);
  io::write_png(img, dir / "img.png");
  CHECK(io::read_png(dir / "img.png") == img);
  const auto any = io::read_png_any(dir / "img.png");
  CHECK(any.kind == io::DecodedPng::Kind::Rgba8);

  const Mask mask = testing_support::random_mask(rng, 12, 9);
  io::write_mask_png(mask, dir / "mask.png");
  CHECK(io::read_mask_png(dir / "mask.png") == mask);
  const auto gray = io::read_png_any(dir / "mask.png");
  REQUIRE(gray.kind == io::DecodedPng::Kind::Gray8);
  for (std::size_t i = 0; i < mask.size(); ++i) CHECK(gray.gray.data()[i] == (mask.data()[i] ? 255 : 0));

  Grid<std::int32_t> faces(6, 2, -1);
  faces(1, 0) = 0;
  faces(2, 0) = 70000;
  faces(3, 1) = 41;
  const auto g16 = io::face_map_to_gray16(faces);
  io::write_gray16_png(g16, dir / "faces.png");
  const auto back = io::read_png_any(dir / "faces.png");
  REQUIRE(back.kind == io::DecodedPng::Kind::Gray16);
  CHECK(back.gray16 == g16);
  CHECK(g16(0, 0) == 0);
  CHECK(g16(1, 0) == 1);
  CHECK(g16(2, 0) == 65535);
  CHECK(g16(3, 1) == 42);

  write_file(dir / "junk.png", "definitely not a png");
  CHECK(code_of([&] { io::read_png(dir / "junk.png"); }) == ErrorCode::BadMagic);
  CHECK(code_of([&] { io::read_png(dir / "missing.png"); }) == ErrorCode::FileNotFound);
}

TEST_CASE("scene configuration") {
  TempDir dir("io_scene");
  write_file(dir / "hand.obj", kTriangleObj);
  write_file(dir / "quad.obj", kQuadObj);
  write_file(dir / "box.obj", format_obj(synthetic::make_box(Vec3(0.02, 0.02, 0.02))));

  SUBCASE("minimal config shares the top-level camera") {
    write_file(dir / "scene.json", R"({
      "camera": {"fx": 500, "fy": 510, "cx": 64, "cy": 48, "width": 128, "height": 96},
      "hand_obj": "hand.obj",
      "source": {},
      "target": {"camera": {"cx": 70}}
    })");
    const auto cfg = io::parse_scene(dir / "scene.json");
    CHECK(cfg.source.camera.fx == 500);
    CHECK(cfg.source.camera.width == 128);
    CHECK(cfg.target.camera.fy == 510);
    CHECK(cfg.target.camera.cx == 70);
    CHECK(cfg.source.hand.face_count() == 1);
    CHECK(cfg.source.hand.instance == Instance::Hand);
    CHECK(cfg.source.object.face_count() == 0);
    CHECK(cfg.options.atlas_size == 1024);
    CHECK_FALSE(cfg.options.skip_fusion);
  }
  SUBCASE("object pose, output options and per-scene files") {
    write_file(dir / "src.png", "");
    write_file(dir / "scene.json", R"({
      "object_obj": "box.obj",
      "source": {"camera": {"fx": 100, "fy": 100, "cx": 32, "cy": 32, "width": 64, "height": 64},
                 "hand_obj": "hand.obj", "image": "src.png",
                 "object_rotation": [1,0,0, 0,0,-1, 0,1,0], "object_translation": [0, 0, 0.5]},
      "target": {"camera": {"fx": 100, "fy": 100, "cx": 32, "cy": 32, "width": 64, "height": 64},
                 "hand_obj": "hand.obj"},
      "output": {"atlas_size": 512, "skip_fusion": true, "dilation_passes": 3}
    })");
    const auto cfg = io::parse_scene(dir / "scene.json");
    CHECK(cfg.source.object.face_count() == 12);
    CHECK(cfg.source.object.has_uvs());
    CHECK(cfg.source.object_pose.rotation(1, 2) == -1.0);
    CHECK(cfg.source.object_pose.translation.z() == 0.5);
    CHECK(cfg.target.object_pose.translation.z() == 0.0);
    REQUIRE(cfg.source.image.has_value());
    CHECK(*cfg.source.image == dir / "src.png");
    CHECK(cfg.options.atlas_size == 512);
    CHECK(cfg.options.skip_fusion);
    CHECK(cfg.options.dilation_passes == 3);
  }
  SUBCASE("missing fx names the field") {
    const std::string text = R"({"hand_obj": "hand.obj",
      "source": {"camera": {"fy": 1, "cx": 0, "cy": 0, "width": 4, "height": 4}},
      "target": {"camera": {"fx": 1, "fy": 1, "cx": 0, "cy": 0, "width": 4, "height": 4}}})";
    try {
      io::parse_scene_text(text, dir.path());
      FAIL("expected SchemaError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SchemaError);
      CHECK(e.detail().find("source.camera.fx") != std::string::npos);
    }
  }
  SUBCASE("hand topology must match across poses") {
    const std::string text = R"({"camera": {"fx": 1, "fy": 1, "cx": 0, "cy": 0, "width": 4, "height": 4},
      "source": {"hand_obj": "hand.obj"}, "target": {"hand_obj": "quad.obj"}})";
    CHECK(code_of([&] { io::parse_scene_text(text, dir.path()); }) == ErrorCode::TopologyMismatch);
  }
  SUBCASE("other schema problems") {
    const std::string cam = R"("camera": {"fx": 1, "fy": 1, "cx": 0, "cy": 0, "width": 4, "height": 4})";
    CHECK(code_of([&] { io::parse_scene_text("{not json", dir.path()); }) == ErrorCode::SchemaError);
    CHECK(code_of([&] { io::parse_scene_text("{" + cam + R"(, "hand_obj": "hand.obj", "source": {}})", dir.path()); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([&] {
            io::parse_scene_text("{" + cam + R"(, "hand_obj": "nope.obj", "source": {}, "target": {}})", dir.path());
          }) == ErrorCode::FileNotFound);
    CHECK(code_of([&] {
            io::parse_scene_text("{" + cam + R"(, "hand_obj": "hand.obj", "source": {"object_rotation": [2,0,0,0,1,0,0,0,1]}, "target": {}})",
                                 dir.path());
          }) == ErrorCode::SchemaError);
    CHECK(code_of([&] {
            io::parse_scene_text(R"({"camera": {"fx": 1, "fy": 1, "cx": 0, "cy": 0, "width": 4.5, "height": 4},
              "hand_obj": "hand.obj", "source": {}, "target": {}})", dir.path());
          }) == ErrorCode::SchemaError);
  }
}

TEST_CASE("prediction records and object registry") {
  TempDir dir("io_metrics");
  std::string joints = "[";
  for (int i = 0; i < 21; ++i) joints += std::string(i ? "," : "") + "[" + std::to_string(i) + ",1,2]";
  joints += "]";
  const std::string rec = R"({"frame_id": 7, "pred_joints": )" + joints + R"(, "gt_joints": )" + joints +
                          R"(, "pred_R": [1,0,0,0,1,0,0,0,1], "pred_t": [1,2,3],
                               "gt_R": [1,0,0,0,1,0,0,0,1], "gt_t": [0,0,0], "object_id": "mug"})";
  std::string one_line = rec;
  std::erase(one_line, '\n');

  const auto frames = io::parse_predictions(one_line + "\n\n" + one_line + "\n");
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].frame_id == "7");
  CHECK(frames[0].object_id == "mug");
  CHECK(frames[0].pred_joints[20] == Vec3(20, 1, 2));
  CHECK(frames[0].pred_pose.translation == Vec3(1, 2, 3));

  CHECK(code_of([] { io::parse_predictions("\n  \n"); }) == ErrorCode::EmptyInput);
  try {
    io::parse_predictions(one_line + "\n{\"frame_id\": 1}\n");
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaError);
    CHECK(e.detail().find("line 2") != std::string::npos);
  }

  write_file(dir / "mug.obj", "v 0 0 0\nv 0.1 0 0\nv 0 0.2 0\n");
  write_file(dir / "registry.json", R"({"mug": {"vertices_path": "mug.obj", "units": "m"},
                                       "cup": {"vertices_path": "mug.obj", "diameter_mm": 5}})");
  const auto reg = io::read_object_registry(dir / "registry.json");
  REQUIRE(reg.size() == 2);
  for (const auto& [id, model] : reg) {
    CHECK(model.vertices.size() == 3);
    if (id == "mug") {
      CHECK(model.diameter == doctest::Approx(std::sqrt(100.0 * 100 + 200.0 * 200)));
      CHECK(model.vertices[2].y() == doctest::Approx(200.0));
    } else {
      CHECK(model.diameter == 5.0);
      CHECK(model.vertices[2].y() == doctest::Approx(0.2));
    }
  }
  write_file(dir / "bad.json", R"({"mug": {"units": "mm"}})");
  CHECK(code_of([&] { io::read_object_registry(dir / "bad.json"); }) == ErrorCode::SchemaError);
}
