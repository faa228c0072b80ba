#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "topoflow/error.hpp"
#include "topoflow/io.hpp"
#include "topoflow/metrics.hpp"
#include "topoflow/parallel.hpp"
#include "topoflow/pipeline.hpp"
#include "topoflow/synthetic.hpp"

#ifndef TOPOFLOW_VERSION
#define TOPOFLOW_VERSION "0.0.0"
#endif

namespace topoflow::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kToolName = "topoflow";

void configure_logging() {
  auto logger = spdlog::get(kToolName);
  if (!logger) logger = spdlog::stderr_color_mt(kToolName);
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("TOPOFLOW_LOG"); env != nullptr && *env != '\0') {
    level = spdlog::level::from_str(env);
  }
  spdlog::set_level(level);
}

int exit_code_for(const Error& e) { return e.is_input_error() ? kExitInput : kExitInternal; }

void report_error(const std::string& message) { std::cerr << kToolName << ": error: " << message << '\n'; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
}

// Files emitted by a command, in write order, so a failed run can take them back.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  template <typename Fn>
  void add(const std::string& name, const std::string& kind, Fn&& write) {
    const fs::path path = dir_ / name;
    written_.push_back(path);
    write(path);
    listing_.push_back({name, kind});
  }

  void discard() {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    written_.clear();
    listing_.clear();
  }

  ordered_json listing() const {
    ordered_json out = ordered_json::object();
    for (const auto& [name, kind] : listing_) out[name] = kind;
    return out;
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  std::vector<std::pair<std::string, std::string>> listing_;
};

// ---------------------------------------------------------------------------
// Pipeline-backed commands

struct PipelineArgs {
  std::string config;
  std::string out = ".";
  int atlas_size = 0;  // 0 keeps the config value
  int threads = 0;
  bool skip_fusion = false;
  bool dump_intermediate = false;
};

struct LoadedRun {
  io::SceneConfig config;
  PipelineInputs inputs;
  PipelineOptions options;
};

LoadedRun load_run(const PipelineArgs& args) {
  LoadedRun run;
  run.config = io::parse_scene(args.config);
  io::RunOptions& opt = run.config.options;
  if (args.atlas_size > 0) opt.atlas_size = args.atlas_size;
  opt.skip_fusion = opt.skip_fusion || args.skip_fusion;
  opt.dump_intermediate = opt.dump_intermediate || args.dump_intermediate;
  if (!run.config.source.image) throw Error(ErrorCode::SchemaError, "source.image: missing");

  run.inputs.source = run.config.source;
  run.inputs.target = run.config.target;
  run.inputs.source_image = io::read_png(*run.config.source.image);
  if (run.config.object_texture) run.inputs.object_texture = io::read_png(*run.config.object_texture);
  run.options.model = {opt.atlas_size, opt.atlas_margin};
  run.options.dilation_passes = opt.dilation_passes;
  run.options.skip_fusion = opt.skip_fusion;
  return run;
}

Mask foreground_of(const RasterBuffers& raster) {
  Mask m(raster.width(), raster.height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = raster.face.data()[i] >= 0 ? 1 : 0;
  return m;
}

void write_raster(Artifacts& out, const std::string& prefix, const RasterBuffers& raster) {
  out.add(prefix + "_faces.png", "face_map", [&](const fs::path& p) {
    io::write_gray16_png(io::face_map_to_gray16(raster.face), p);
  });
  out.add(prefix + "_depth.tflo", "depth", [&](const fs::path& p) { io::write_tflo(raster.depth, p); });
}

void write_generate_outputs(Artifacts& out, const PipelineResult& r, const io::RunOptions& opt) {
  out.add("coarse_target.png", "image", [&](const fs::path& p) { io::write_png(r.coarse_target, p); });
  if (r.final_image) {
    out.add("final.png", "image", [&](const fs::path& p) { io::write_png(*r.final_image, p); });
  }
  out.add("flow_us.tflo", "flow", [&](const fs::path& p) { io::write_tflo(r.flow_us, p); });
  out.add("flow_tu.tflo", "flow", [&](const fs::path& p) { io::write_tflo(r.flow_tu, p); });
  out.add("flow_ts.tflo", "flow", [&](const fs::path& p) { io::write_tflo(r.flow_ts, p); });
  out.add("visibility.png", "mask", [&](const fs::path& p) { io::write_mask_png(r.visibility, p); });
  out.add("topology.tmap", "topology", [&](const fs::path& p) { io::write_tmap(r.topology, p); });
  out.add("mask_h.png", "mask", [&](const fs::path& p) { io::write_mask_png(r.masks.hand, p); });
  out.add("mask_f.png", "mask", [&](const fs::path& p) { io::write_mask_png(r.masks.foreground, p); });
  out.add("atlas.png", "image", [&](const fs::path& p) { io::write_png(r.unified.image, p); });
  if (!opt.dump_intermediate) return;
  write_raster(out, "source", r.source_raster);
  write_raster(out, "target", r.target_raster);
  out.add("unified_faces.png", "face_map", [&](const fs::path& p) {
    io::write_gray16_png(io::face_map_to_gray16(r.unified_raster.face), p);
  });
  out.add("atlas_filled.png", "mask", [&](const fs::path& p) { io::write_mask_png(r.unified.filled, p); });
  if (!opt.skip_fusion) {
    out.add("hand_layer.png", "image", [&](const fs::path& p) { io::write_png(r.hand_layer, p); });
    out.add("background.png", "image", [&](const fs::path& p) { io::write_png(r.background, p); });
  }
}

ordered_json manifest_header(const PipelineArgs& args) {
  ordered_json m;
  m["tool"] = kToolName;
  m["version"] = TOPOFLOW_VERSION;
  m["config"] = args.config;
  m["output_dir"] = args.out;
  return m;
}

int cmd_generate(const PipelineArgs& args) {
  set_max_threads(args.threads);
  Artifacts out{fs::path(args.out)};
  ordered_json manifest = manifest_header(args);
  auto fail = [&](int code, const std::string& error_code, const std::string& stage, const std::string& message) {
    out.discard();
    manifest["status"] = "failed";
    ordered_json err;
    err["code"] = error_code;
    if (!stage.empty()) err["stage"] = stage;
    err["message"] = message;
    manifest["error"] = err;
    report_error(message);
    try {
      ensure_directory(out.dir());
      write_text(out.dir() / "manifest.json", manifest.dump(2) + "\n");
    } catch (const Error& e) {
      report_error(std::string("could not write failure manifest: ") + e.what());
    }
    return code;
  };

  try {
    LoadedRun run = load_run(args);
    spdlog::info("running pipeline on {} (atlas {}, threads {})", args.config,
                 run.options.model.atlas_size, max_threads());
    const PipelineResult result = run_pipeline(run.inputs, run.options);
    ensure_directory(out.dir());
    write_generate_outputs(out, result, run.config.options);

    manifest["status"] = "ok";
    manifest["skip_fusion"] = run.options.skip_fusion;
    manifest["atlas_size"] = run.options.model.atlas_size;
    manifest["artifacts"] = out.listing();
    ordered_json timings = ordered_json::object();
    for (const auto& t : result.timings) timings[t.stage] = t.milliseconds;
    manifest["timings_ms"] = timings;
    write_text(out.dir() / "manifest.json", manifest.dump(2) + "\n");
    spdlog::info("wrote {} artifacts to {}", result.timings.size(), args.out);
    return kExitOk;
  } catch (const StageError& e) {
    return fail(exit_code_for(e), std::string(to_string(e.code())), e.stage(), e.what());
  } catch (const Error& e) {
    return fail(exit_code_for(e), std::string(to_string(e.code())), "", e.what());
  } catch (const std::exception& e) {
    return fail(kExitInternal, "Internal", "", e.what());
  }
}

// Stage subcommands run the chain up to the fusion step and emit a subset.
enum class StageView { Raster, Atlas, Flow };

int cmd_stage(const PipelineArgs& base, StageView view) {
  PipelineArgs args = base;
  args.skip_fusion = true;
  set_max_threads(args.threads);
  LoadedRun run = load_run(args);
  run.options.skip_fusion = true;
  const PipelineResult r = run_pipeline(run.inputs, run.options);
  ensure_directory(args.out);
  Artifacts out{fs::path(args.out)};
  switch (view) {
    case StageView::Raster:
      write_raster(out, "source", r.source_raster);
      write_raster(out, "target", r.target_raster);
      out.add("unified_faces.png", "face_map", [&](const fs::path& p) {
        io::write_gray16_png(io::face_map_to_gray16(r.unified_raster.face), p);
      });
      out.add("source_foreground.png", "mask",
              [&](const fs::path& p) { io::write_mask_png(foreground_of(r.source_raster), p); });
      break;
    case StageView::Atlas: {
      out.add("atlas.png", "image", [&](const fs::path& p) { io::write_png(r.unified.image, p); });
      out.add("atlas_filled.png", "mask", [&](const fs::path& p) { io::write_mask_png(r.unified.filled, p); });
      out.add("unified_faces.png", "face_map", [&](const fs::path& p) {
        io::write_gray16_png(io::face_map_to_gray16(r.unified_raster.face), p);
      });
      const AtlasLayout& l = r.model.layout;
      auto rect_json = [](const InstanceAtlas& a) {
        ordered_json j;
        j["rect"] = {a.rect.x, a.rect.y, a.rect.width, a.rect.height};
        j["cells_per_row"] = a.cells_per_row;
        j["cell_side"] = a.cell_side;
        j["margin"] = a.margin;
        return j;
      };
      ordered_json layout;
      layout["atlas_size"] = l.atlas_size;
      layout["hand"] = rect_json(l.hand);
      layout["object"] = rect_json(l.object);
      layout["hand_faces"] = r.model.hand_faces;
      layout["object_faces"] = static_cast<int>(r.model.faces.size()) - r.model.hand_faces;
      out.add("atlas_layout.json", "layout",
              [&](const fs::path& p) { write_text(p, layout.dump(2) + "\n"); });
      break;
    }
    case StageView::Flow:
      out.add("flow_us.tflo", "flow", [&](const fs::path& p) { io::write_tflo(r.flow_us, p); });
      out.add("visibility.png", "mask", [&](const fs::path& p) { io::write_mask_png(r.visibility, p); });
      out.add("flow_tu.tflo", "flow", [&](const fs::path& p) { io::write_tflo(r.flow_tu, p); });
      out.add("flow_ts.tflo", "flow", [&](const fs::path& p) { io::write_tflo(r.flow_ts, p); });
      out.add("topology.tmap", "topology", [&](const fs::path& p) { io::write_tmap(r.topology, p); });
      break;
  }
  const ordered_json written = out.listing();
  for (const auto& [name, kind] : written.items()) {
    std::cout << name << " (" << kind.get<std::string>() << ")\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fuse

struct FuseArgs {
  std::string background, object, hand, hand_mask, foreground;
  std::string out = "fused.png";
};

int cmd_fuse(const FuseArgs& a) {
  LayerSet layers{io::read_png(a.background), io::read_png(a.object), io::read_png(a.hand),
                  io::read_mask_png(a.hand_mask), io::read_mask_png(a.foreground)};
  io::write_png(fuse(layers), a.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
  std::string predictions;
  std::string registry;
  std::string out = ".";
  std::string method = "prediction";
  double pck_max_mm = 50.0;
  int pck_steps = 100;
};

int cmd_metrics(const MetricsArgs& a) {
  const auto frames = io::read_predictions(a.predictions);
  const auto registry = io::read_object_registry(a.registry);
  const metrics::PckRange range{a.pck_max_mm, a.pck_steps};
  const metrics::Report report = metrics::evaluate(frames, registry, range);

  ordered_json j;
  j["tool"] = kToolName;
  j["version"] = TOPOFLOW_VERSION;
  j["method"] = a.method;
  j["frames"] = report.frames;
  j["pck"] = {{"t_max_mm", range.t_max_mm}, {"steps", range.steps}};
  j["hand"] = {{"auc", report.hand_auc}, {"pa_mpjpe_mm", report.hand_pa_mpjpe}};
  ordered_json objects = ordered_json::array();
  for (const auto& o : report.objects) {
    ordered_json e;
    e["object_id"] = o.object_id;
    e["frames"] = o.frames;
    e["passed"] = o.passed;
    e["mean_add_mm"] = o.mean_add;
    e["add_01d"] = o.add_01d_percent;
    objects.push_back(e);
  }
  j["objects"] = objects;
  j["average_add_01d"] = report.average_add_01d;

  std::string header = "method,hand_auc,hand_pajpe";
  std::string row = fmt::format("{},{:.4f},{:.4f}", a.method, report.hand_auc, report.hand_pa_mpjpe);
  for (const auto& o : report.objects) {
    header += "," + o.object_id;
    row += fmt::format(",{:.4f}", o.add_01d_percent);
  }
  header += ",average";
  row += fmt::format(",{:.4f}", report.average_add_01d);

  ensure_directory(a.out);
  write_text(fs::path(a.out) / "report.json", j.dump(2) + "\n");
  write_text(fs::path(a.out) / "table.csv", header + "\n" + row + "\n");
  std::cout << header << '\n' << row << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// inspect

struct ChannelStats {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

void print_summary(const std::string& path, const std::string& kind, std::uint32_t w, std::uint32_t h,
                   std::size_t channels, std::size_t valid, const std::vector<ChannelStats>& stats) {
  const std::size_t total = static_cast<std::size_t>(w) * h;
  std::cout << "file: " << path << '\n'
            << "kind: " << kind << '\n'
            << "size: " << w << 'x' << h << '\n'
            << "channels: " << channels << '\n'
            << fmt::format("valid: {:.1f}%", total ? 100.0 * static_cast<double>(valid) / static_cast<double>(total) : 0.0) << '\n';
  for (std::size_t c = 0; c < stats.size(); ++c) {
    if (stats[c].lo > stats[c].hi) {
      std::cout << "channel " << c << ": no valid values\n";
    } else {
      std::cout << fmt::format("channel {}: min {:.6g} max {:.6g}", c, stats[c].lo, stats[c].hi) << '\n';
    }
  }
}

bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::equal(sig, sig + 8, bytes.begin());
}

int cmd_inspect(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (has_png_signature(bytes)) {
    const io::DecodedPng png = io::read_png_any(path);
    switch (png.kind) {
      case io::DecodedPng::Kind::Rgba8: {
        std::vector<ChannelStats> stats(4);
        std::size_t valid = 0;
        for (const Rgba& px : png.rgba.data()) {
          for (int c = 0; c < 4; ++c) stats[c].add(px[c]);
          valid += px[3] != 0;
        }
        print_summary(path, "image", static_cast<std::uint32_t>(png.rgba.width()),
                      static_cast<std::uint32_t>(png.rgba.height()), 4, valid, stats);
        break;
      }
      case io::DecodedPng::Kind::Gray8: {
        std::vector<ChannelStats> stats(1);
        std::size_t valid = 0;
        for (std::uint8_t v : png.gray.data()) {
          stats[0].add(v);
          valid += v != 0;
        }
        print_summary(path, "mask", static_cast<std::uint32_t>(png.gray.width()),
                      static_cast<std::uint32_t>(png.gray.height()), 1, valid, stats);
        break;
      }
      case io::DecodedPng::Kind::Gray16: {
        std::vector<ChannelStats> stats(1);
        std::size_t valid = 0;
        for (std::uint16_t v : png.gray16.data()) {
          stats[0].add(v);
          valid += v != 0;
        }
        print_summary(path, "face_map", static_cast<std::uint32_t>(png.gray16.width()),
                      static_cast<std::uint32_t>(png.gray16.height()), 1, valid, stats);
        break;
      }
    }
    return kExitOk;
  }

  const io::FloatField field = io::decode_field(bytes);
  std::string kind = "topology";
  if (field.kind == io::FieldKind::Flow) kind = field.channels == 1 ? "depth" : "flow";
  std::vector<ChannelStats> stats(field.channels);
  std::size_t valid = 0;
  const std::size_t pixels = static_cast<std::size_t>(field.width) * field.height;
  for (std::size_t i = 0; i < pixels; ++i) {
    bool ok = true;
    for (std::uint32_t c = 0; c < field.channels; ++c) {
      const float v = field.values[i * field.channels + c];
      if (std::isfinite(v)) {
        stats[c].add(v);
      } else {
        ok = false;
      }
    }
    valid += ok;
  }
  print_summary(path, kind, field.width, field.height, field.channels, valid, stats);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// make-demo

struct DemoArgs {
  std::string out = "demo";
  int size = 256;
  bool same_pose = false;
};

ordered_json camera_json(const Camera& c) {
  ordered_json j;
  j["fx"] = c.fx;
  j["fy"] = c.fy;
  j["cx"] = c.cx;
  j["cy"] = c.cy;
  j["width"] = c.width;
  j["height"] = c.height;
  return j;
}

ordered_json pose_json(ordered_json j, const RigidTransform& pose) {
  ordered_json r = ordered_json::array();
  for (int i = 0; i < 9; ++i) r.push_back(pose.rotation(i / 3, i % 3));
  j["object_rotation"] = r;
  j["object_translation"] = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
  return j;
}

int cmd_make_demo(const DemoArgs& a) {
  const synthetic::DemoScene demo = synthetic::make_demo_scene(!a.same_pose, a.size);
  const fs::path dir(a.out);
  ensure_directory(dir);
  write_obj(demo.source.hand, dir / "hand_source.obj");
  write_obj(demo.target.hand, dir / "hand_target.obj");
  write_obj(demo.source.object, dir / "object.obj");
  io::write_png(demo.object_texture, dir / "object_texture.png");
  io::write_png(demo.source_image, dir / "source.png");
  io::write_png(demo.target_render, dir / "target_render.png");

  ordered_json cfg;
  cfg["camera"] = camera_json(demo.source.camera);
  cfg["object_obj"] = "object.obj";
  cfg["object_texture"] = "object_texture.png";
  ordered_json src;
  src["hand_obj"] = "hand_source.obj";
  src["image"] = "source.png";
  cfg["source"] = pose_json(src, demo.source.object_pose);
  ordered_json tgt;
  tgt["hand_obj"] = "hand_target.obj";
  cfg["target"] = pose_json(tgt, demo.target.object_pose);
  write_text(dir / "scene.json", cfg.dump(2) + "\n");
  std::cout << (dir / "scene.json").string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

void add_pipeline_flags(CLI::App* sub, PipelineArgs& a) {
  sub->add_option("config", a.config, "Scene configuration JSON")->required();
  sub->add_option("--out", a.out, "Output directory");
  sub->add_option("--atlas-size", a.atlas_size, "Unified atlas side in pixels")->check(CLI::PositiveNumber);
  sub->add_option("--threads", a.threads, "Worker thread cap (0 = all cores)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  configure_logging();

  CLI::App app{"Occlusion-aware topology modelling: texture flow, visibility, fusion and metrics", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", TOPOFLOW_VERSION);

  PipelineArgs gen;
  auto* generate = app.add_subcommand("generate", "Run the full chain and write every artifact");
  add_pipeline_flags(generate, gen);
  generate->add_flag("--skip-fusion", gen.skip_fusion, "Stop after the coarse target");
  generate->add_flag("--dump-intermediate", gen.dump_intermediate, "Also write rasters and layers");

  PipelineArgs raster_args, atlas_args, flow_args;
  auto* raster = app.add_subcommand("raster", "Rasterize source, target and unified views");
  add_pipeline_flags(raster, raster_args);
  auto* atlas = app.add_subcommand("atlas", "Build the unified texture");
  add_pipeline_flags(atlas, atlas_args);
  auto* flow = app.add_subcommand("flow", "Compute flows, visibility and the topology map");
  add_pipeline_flags(flow, flow_args);

  FuseArgs fuse_args;
  auto* fuse_cmd = app.add_subcommand("fuse", "Combine background, object and hand layers");
  fuse_cmd->add_option("--background", fuse_args.background, "Background layer PNG")->required();
  fuse_cmd->add_option("--object", fuse_args.object, "Object layer PNG")->required();
  fuse_cmd->add_option("--hand", fuse_args.hand, "Hand layer PNG")->required();
  fuse_cmd->add_option("--hand-mask", fuse_args.hand_mask, "Hand mask PNG")->required();
  fuse_cmd->add_option("--foreground", fuse_args.foreground, "Foreground mask PNG")->required();
  fuse_cmd->add_option("--out", fuse_args.out, "Output PNG");

  MetricsArgs met;
  auto* metrics_cmd = app.add_subcommand("metrics", "Hand AUC, PA-MPJPE and ADD-0.1D");
  metrics_cmd->add_option("predictions", met.predictions, "Predictions JSONL")->required();
  metrics_cmd->add_option("registry", met.registry, "Object registry JSON")->required();
  metrics_cmd->add_option("--out", met.out, "Output directory");
  metrics_cmd->add_option("--method", met.method, "Row label in table.csv");
  metrics_cmd->add_option("--pck-max-mm", met.pck_max_mm, "Upper PCK threshold in mm")->check(CLI::PositiveNumber);
  metrics_cmd->add_option("--pck-steps", met.pck_steps, "Trapezoid intervals")->check(CLI::PositiveNumber);

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Summarize a TFLO, TMAP or PNG artifact");
  inspect->add_option("file", inspect_path, "Artifact path")->required();

  DemoArgs demo;
  auto* make_demo = app.add_subcommand("make-demo", "Write a synthetic hand-object scene and its config");
  make_demo->add_option("--out", demo.out, "Output directory");
  make_demo->add_option("--size", demo.size, "Image side in pixels")->check(CLI::Range(32, 4096));
  make_demo->add_flag("--same-pose", demo.same_pose, "Use the source pose as the target");

  std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (*generate) return cmd_generate(gen);
  try {
    if (*raster) return cmd_stage(raster_args, StageView::Raster);
    if (*atlas) return cmd_stage(atlas_args, StageView::Atlas);
    if (*flow) return cmd_stage(flow_args, StageView::Flow);
    if (*fuse_cmd) return cmd_fuse(fuse_args);
    if (*metrics_cmd) return cmd_metrics(met);
    if (*inspect) return cmd_inspect(inspect_path);
    if (*make_demo) return cmd_make_demo(demo);
  } catch (const StageError& e) {
    report_error(e.what());
    return exit_code_for(e);
  } catch (const Error& e) {
    report_error(e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    report_error(e.what());
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace topoflow::cli
