#include <sys/wait.h>

#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "scenes.hpp"
#include "topoflow/io.hpp"

using namespace topoflow;
using nlohmann::json;
using testing_support::read_file;
using testing_support::TempDir;
using testing_support::write_file;
namespace fs = std::filesystem;

namespace {

struct Captured {
  int code = 0;
  std::string out;
};

// In-process run with stdout captured.
Captured run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "topoflow");
  std::ostringstream buffer;
  auto* old = std::cout.rdbuf(buffer.rdbuf());
  Captured c;
  try {
    c.code = cli::run(args);
  } catch (...) {
    std::cout.rdbuf(old);
    throw;
  }
  std::cout.rdbuf(old);
  c.out = buffer.str();
  return c;
}

// Real process, so exit codes are checked end to end.
int run_process(const std::string& args) {
  const std::string cmd = std::string("\"") + TOPOFLOW_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

std::string fmt_vec(const Vec3& v) {
  std::ostringstream o;
  o.precision(17);
  o << '[' << v.x() << ',' << v.y() << ',' << v.z() << ']';
  return o.str();
}

std::string joints_json(const std::vector<Vec3>& j) {
  std::string s = "[";
  for (std::size_t i = 0; i < j.size(); ++i) {
    s += (i ? "," : "") + fmt_vec(j[i]);
  }
  return s + "]";
}

}  // namespace

TEST_CASE("demo scene through generate") {
  TempDir dir("cli_generate");
  const auto demo_dir = (dir / "demo").string();
  REQUIRE(run_cli({"make-demo", "--out", demo_dir, "--size", "96"}).code == 0);
  for (const char* f : {"scene.json", "hand_source.obj", "hand_target.obj", "object.obj", "object_texture.png",
                        "source.png", "target_render.png"}) {
    CHECK(fs::exists(dir / "demo" / f));
  }

  SUBCASE("full run") {
    const auto out = (dir / "out").string();
    REQUIRE(run_cli({"generate", demo_dir + "/scene.json", "--out", out, "--atlas-size", "512"}).code == 0);
    const json m = read_json(dir / "out" / "manifest.json");
    CHECK(m["status"] == "ok");
    CHECK(m["atlas_size"] == 512);
    CHECK(m["skip_fusion"] == false);
    for (const char* f : {"coarse_target.png", "final.png", "flow_us.tflo", "flow_tu.tflo", "flow_ts.tflo",
                          "visibility.png", "topology.tmap", "mask_h.png", "mask_f.png", "atlas.png"}) {
      CHECK(fs::exists(dir / "out" / f));
      CHECK(m["artifacts"].contains(f));
    }
    CHECK(m["artifacts"]["topology.tmap"] == "topology");
    CHECK(m["timings_ms"].contains("fusion"));
    CHECK(io::read_png(dir / "out" / "final.png").width() == 96);
    CHECK(io::read_field(dir / "out" / "flow_us.tflo").width == 512);
    CHECK_FALSE(fs::exists(dir / "out" / "hand_layer.png"));
  }
  SUBCASE("skip fusion and dump intermediates") {
    const auto out = (dir / "skip").string();
    REQUIRE(run_cli({"generate", demo_dir + "/scene.json", "--out", out, "--atlas-size", "256", "--skip-fusion",
                     "--dump-intermediate"})
                .code == 0);
    const json m = read_json(dir / "skip" / "manifest.json");
    CHECK(m["skip_fusion"] == true);
    CHECK_FALSE(fs::exists(dir / "skip" / "final.png"));
    CHECK_FALSE(m["artifacts"].contains("final.png"));
    for (const char* f : {"source_faces.png", "target_depth.tflo", "unified_faces.png", "atlas_filled.png"}) {
      CHECK(fs::exists(dir / "skip" / f));
    }
  }
  SUBCASE("stage subcommands") {
    const std::string cfg = demo_dir + "/scene.json";
    CHECK(run_cli({"raster", cfg, "--out", (dir / "r").string(), "--atlas-size", "256"}).code == 0);
    CHECK(fs::exists(dir / "r" / "unified_faces.png"));
    CHECK(run_cli({"atlas", cfg, "--out", (dir / "a").string(), "--atlas-size", "256"}).code == 0);
    const json layout = read_json(dir / "a" / "atlas_layout.json");
    CHECK(layout["atlas_size"] == 256);
    CHECK(layout["hand_faces"] == 192);
    CHECK(layout["object_faces"] == 12);
    CHECK(run_cli({"flow", cfg, "--out", (dir / "f").string(), "--atlas-size", "256"}).code == 0);
    for (const char* f : {"flow_us.tflo", "flow_tu.tflo", "flow_ts.tflo", "visibility.png", "topology.tmap"}) {
      CHECK(fs::exists(dir / "f" / f));
    }
  }
}

TEST_CASE("exit codes") {
  TempDir dir("cli_exit");
  CHECK(run_process("--help") == 0);
  CHECK(run_process("--version") == 0);
  CHECK(run_process("") == 2);
  CHECK(run_process("no-such-command") == 2);
  CHECK(run_process("generate") == 2);
  CHECK(run_process("inspect '" + (dir / "missing.tflo").string() + "'") == 2);

  SUBCASE("unreadable config leaves only a failure manifest") {
    write_file(dir / "broken.json", "{ this is not json");
    const auto out = dir / "out";
    CHECK(run_process("generate '" + (dir / "broken.json").string() + "' --out '" + out.string() + "'") == 2);
    CHECK(listing(out) == std::vector<std::string>{"manifest.json"});
    const json m = read_json(out / "manifest.json");
    CHECK(m["status"] == "failed");
    CHECK(m["error"]["code"] == "SchemaError");
  }
  SUBCASE("config without a source image") {
    write_file(dir / "hand.obj", "v 0 0 1\nv 0.1 0 1\nv 0 0.1 1\nf 1 2 3\n");
    write_file(dir / "scene.json", R"({"camera": {"fx": 50, "fy": 50, "cx": 16, "cy": 16, "width": 32, "height": 32},
      "hand_obj": "hand.obj", "source": {}, "target": {}})");
    const auto out = dir / "noimg";
    CHECK(run_process("generate '" + (dir / "scene.json").string() + "' --out '" + out.string() + "'") == 2);
    const json m = read_json(out / "manifest.json");
    CHECK(m["error"]["message"].get<std::string>().find("source.image") != std::string::npos);
  }
}

TEST_CASE("metrics subcommand") {
  TempDir dir("cli_metrics");
  write_file(dir / "box.obj", "v 0 0 0\nv 100 0 0\nv 0 100 0\nv 0 0 100\n");
  write_file(dir / "registry.json", R"({"box": {"vertices_path": "box.obj"}, "can": {"vertices_path": "box.obj"}})");

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 50.0);
  std::string lines;
  for (int i = 0; i < 4; ++i) {
    std::vector<Vec3> joints;
    for (int k = 0; k < 21; ++k) joints.emplace_back(g(rng), g(rng), g(rng));
    lines += R"({"frame_id": ")" + std::to_string(i) + R"(", "pred_joints": )" + joints_json(joints) +
             R"(, "gt_joints": )" + joints_json(joints) +
             R"(, "pred_R": [1,0,0,0,1,0,0,0,1], "pred_t": [0,0,500], "gt_R": [1,0,0,0,1,0,0,0,1], "gt_t": [0,0,500], "object_id": ")" +
             (i % 2 ? "box" : "can") + "\"}\n";
  }
  write_file(dir / "pred.jsonl", lines);
  const auto out = (dir / "report").string();
  const Captured c = run_cli({"metrics", (dir / "pred.jsonl").string(), (dir / "registry.json").string(), "--out",
                              out, "--method", "ours"});
  REQUIRE(c.code == 0);
  const json r = read_json(dir / "report" / "report.json");
  CHECK(r["frames"] == 4);
  CHECK(r["hand"]["auc"].get<double>() == doctest::Approx(100.0));
  CHECK(r["hand"]["pa_mpjpe_mm"].get<double>() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r["average_add_01d"].get<double>() == doctest::Approx(100.0));
  CHECK(r["objects"][0]["object_id"] == "box");
  const std::string csv = read_file(dir / "report" / "table.csv");
  CHECK(csv.rfind("method,hand_auc,hand_pajpe,box,can,average\nours,100.0000,", 0) == 0);
  CHECK(c.out.find("ours,100.0000") != std::string::npos);

  write_file(dir / "empty.jsonl", "\n");
  CHECK(run_process("metrics '" + (dir / "empty.jsonl").string() + "' '" + (dir / "registry.json").string() +
                    "' --out '" + out + "'") == 2);
}

TEST_CASE("inspect subcommand") {
  TempDir dir("cli_inspect");
  FlowField f(5, 2);
  for (int i = 0; i < 6; ++i) f.set(i % 5, i / 5, i, -i);
  io::write_tflo(f, dir / "f.tflo");
  Captured c = run_cli({"inspect", (dir / "f.tflo").string()});
  CHECK(c.code == 0);
  CHECK(c.out.find("kind: flow") != std::string::npos);
  CHECK(c.out.find("size: 5x2") != std::string::npos);
  CHECK(c.out.find("valid: 60.0%") != std::string::npos);
  CHECK(c.out.find("channel 1: min -5 max 0") != std::string::npos);

  io::write_tmap(TopologyMap{Grid<Float2>(3, 3, Float2{1, 2})}, dir / "t.tmap");
  c = run_cli({"inspect", (dir / "t.tmap").string()});
  CHECK(c.out.find("kind: topology") != std::string::npos);
  CHECK(c.out.find("valid: 100.0%") != std::string::npos);

  io::write_mask_png(Mask(4, 4, 1), dir / "m.png");
  c = run_cli({"inspect", (dir / "m.png").string()});
  CHECK(c.out.find("kind: mask") != std::string::npos);

  std::string bytes = read_file(dir / "f.tflo");
  bytes.resize(bytes.size() - 3);
  write_file(dir / "cut.tflo", bytes);
  CHECK(run_process("inspect '" + (dir / "cut.tflo").string() + "'") == 2);
  write_file(dir / "bad.tflo", "XFLO" + bytes.substr(4));
  CHECK(run_process("inspect '" + (dir / "bad.tflo").string() + "'") == 2);
}

TEST_CASE("fuse subcommand matches the formula") {
  TempDir dir("cli_fuse");
  std::mt19937_64 rng(8);
  const Image b = testing_support::random_image(rng, 8, 8);
  const Image o = testing_support::random_image(rng, 8, 8);
  const Image h = testing_support::random_image(rng, 8, 8);
  const Mask mh = testing_support::random_mask(rng, 8, 8);
  const Mask mf = testing_support::random_mask(rng, 8, 8);
  io::write_png(b, dir / "b.png");
  io::write_png(o, dir / "o.png");
  io::write_png(h, dir / "h.png");
  io::write_mask_png(mh, dir / "mh.png");
  io::write_mask_png(mf, dir / "mf.png");
  const auto out = dir / "fused.png";
  REQUIRE(run_cli({"fuse", "--background", (dir / "b.png").string(), "--object", (dir / "o.png").string(), "--hand",
                   (dir / "h.png").string(), "--hand-mask", (dir / "mh.png").string(), "--foreground",
                   (dir / "mf.png").string(), "--out", out.string()})
              .code == 0);
  CHECK(io::read_png(out) == oracle::scalar_fuse(b, o, h, mh, mf));

  io::write_png(Image(4, 4), dir / "small.png");
  CHECK(run_process("fuse --background '" + (dir / "small.png").string() + "' --object '" +
                    (dir / "o.png").string() + "' --hand '" + (dir / "h.png").string() + "' --hand-mask '" +
                    (dir / "mh.png").string() + "' --foreground '" + (dir / "mf.png").string() + "' --out '" +
                    out.string() + "'") == 2);
}
