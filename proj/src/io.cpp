#include "topoflow/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "topoflow/error.hpp"

namespace topoflow::io {

static_assert(std::endian::native == std::endian::little, "TFLO codec assumes a little-endian host");

namespace {

using nlohmann::json;

constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// TFLO / TMAP

std::vector<std::uint8_t> encode_field(const FloatField& field) {
  const std::size_t count =
      static_cast<std::size_t>(field.width) * field.height * field.channels;
  if (field.width == 0 || field.height == 0 || field.channels == 0) {
    throw Error(ErrorCode::IoError, "field dimensions must be at least 1");
  }
  if (field.values.size() != count) {
    throw Error(ErrorCode::SizeMismatch, "field holds " + std::to_string(field.values.size()) +
                                             " values, header implies " + std::to_string(count));
  }
  std::vector<std::uint8_t> out;
  out.reserve(kTfloHeaderBytes + 4 * count);
  const char* magic = field.kind == FieldKind::Topology ? "TMAP" : "TFLO";
  out.insert(out.end(), magic, magic + 4);
  put_u32(out, kTfloVersion);
  put_u32(out, field.width);
  put_u32(out, field.height);
  put_u32(out, field.channels);
  const std::size_t at = out.size();
  out.resize(at + 4 * count);
  std::memcpy(out.data() + at, field.values.data(), 4 * count);
  return out;
}

FloatField decode_field(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::TruncatedPayload, "file shorter than the magic");
  FloatField field;
  if (std::memcmp(bytes.data(), "TFLO", 4) == 0) {
    field.kind = FieldKind::Flow;
  } else if (std::memcmp(bytes.data(), "TMAP", 4) == 0) {
    field.kind = FieldKind::Topology;
  } else {
    throw Error(ErrorCode::BadMagic, "expected TFLO or TMAP, got '" +
                                         std::string(reinterpret_cast<const char*>(bytes.data()), 4) + "'");
  }
  if (bytes.size() < kTfloHeaderBytes) throw Error(ErrorCode::TruncatedPayload, "header is incomplete");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kTfloVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(version));
  }
  field.width = get_u32(bytes, 8);
  field.height = get_u32(bytes, 12);
  field.channels = get_u32(bytes, 16);
  const std::uint64_t count = static_cast<std::uint64_t>(field.width) * field.height * field.channels;
  const std::uint64_t payload = bytes.size() - kTfloHeaderBytes;
  if (payload < 4 * count) {
    throw Error(ErrorCode::TruncatedPayload, "payload has " + std::to_string(payload) +
                                                 " bytes, header requires " + std::to_string(4 * count));
  }
  if (payload > 4 * count) {
    throw Error(ErrorCode::TruncatedPayload, "payload has " + std::to_string(payload - 4 * count) +
                                                 " trailing bytes");
  }
  field.values.resize(static_cast<std::size_t>(count));
  std::memcpy(field.values.data(), bytes.data() + kTfloHeaderBytes, static_cast<std::size_t>(4 * count));
  return field;
}

void write_field(const FloatField& field, const std::filesystem::path& path) {
  const auto bytes = encode_field(field);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

FloatField read_field(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  return decode_field(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace {

FloatField pack_pairs(const Grid<Float2>& grid, const Mask* valid, FieldKind kind) {
  FloatField f{kind, static_cast<std::uint32_t>(grid.width()), static_cast<std::uint32_t>(grid.height()), 2, {}};
  f.values.reserve(grid.size() * 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool ok = valid == nullptr || valid->data()[i] != 0;
    f.values.push_back(ok ? grid.data()[i][0] : kNaN);
    f.values.push_back(ok ? grid.data()[i][1] : kNaN);
  }
  return f;
}

}  // namespace

FloatField to_field(const FlowField& flow) { return pack_pairs(flow.vectors, &flow.valid, FieldKind::Flow); }

FloatField to_field(const TopologyMap& map) { return pack_pairs(map.values, nullptr, FieldKind::Topology); }

FloatField to_field(const Grid<float>& depth) {
  FloatField f{FieldKind::Flow, static_cast<std::uint32_t>(depth.width()),
               static_cast<std::uint32_t>(depth.height()), 1, depth.data()};
  return f;
}

FlowField to_flow(const FloatField& field) {
  if (field.channels != 2) {
    throw Error(ErrorCode::SizeMismatch, "flow needs 2 channels, file has " + std::to_string(field.channels));
  }
  FlowField flow(static_cast<int>(field.width), static_cast<int>(field.height));
  for (std::size_t i = 0; i < flow.vectors.size(); ++i) {
    const float u = field.values[2 * i];
    const float v = field.values[2 * i + 1];
    flow.vectors.data()[i] = {u, v};
    flow.valid.data()[i] = std::isnan(u) || std::isnan(v) ? 0 : 1;
  }
  return flow;
}

TopologyMap to_topology(const FloatField& field) {
  if (field.channels != 2) {
    throw Error(ErrorCode::SizeMismatch,
                "topology map needs 2 channels, file has " + std::to_string(field.channels));
  }
  TopologyMap map{Grid<Float2>(static_cast<int>(field.width), static_cast<int>(field.height))};
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    map.values.data()[i] = {field.values[2 * i], field.values[2 * i + 1]};
  }
  return map;
}

Grid<float> to_depth(const FloatField& field) {
  if (field.channels != 1) {
    throw Error(ErrorCode::SizeMismatch, "depth needs 1 channel, file has " + std::to_string(field.channels));
  }
  Grid<float> depth(static_cast<int>(field.width), static_cast<int>(field.height));
  depth.data() = field.values;
  return depth;
}

void write_tflo(const FlowField& flow, const std::filesystem::path& path) { write_field(to_field(flow), path); }
void write_tflo(const Grid<float>& depth, const std::filesystem::path& path) { write_field(to_field(depth), path); }
void write_tmap(const TopologyMap& map, const std::filesystem::path& path) { write_field(to_field(map), path); }

// ---------------------------------------------------------------------------
// Scene configuration

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what = "") {
  throw Error(ErrorCode::SchemaError, what.empty() ? where : where + ": " + what);
}

double number_at(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema(where + "." + key, "missing");
  if (!it->is_number()) schema(where + "." + key, "expected a number");
  return it->get<double>();
}

std::vector<double> numbers_at(const json& obj, const std::string& key, std::size_t count,
                               const std::string& where) {
  const auto& arr = obj.at(key);
  if (!arr.is_array() || arr.size() != count) {
    schema(where + "." + key, "expected an array of " + std::to_string(count) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (!arr[i].is_number()) schema(where + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(arr[i].get<double>());
  }
  return out;
}

std::string string_at(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_string()) schema(where + "." + key, "expected a string");
  return v.get<std::string>();
}

// Scene key lookup with fallback to the document's top level.
const json* lookup(const json& scene, const json& root, const std::string& key) {
  if (scene.contains(key)) return &scene.at(key);
  if (root.contains(key)) return &root.at(key);
  return nullptr;
}

Camera parse_camera(const json& scene, const json& root, const std::string& where) {
  json merged = json::object();
  if (root.contains("camera")) {
    if (!root["camera"].is_object()) schema("camera", "expected an object");
    merged.update(root["camera"]);
  }
  if (scene.contains("camera")) {
    if (!scene["camera"].is_object()) schema(where + ".camera", "expected an object");
    merged.update(scene["camera"]);
  }
  const std::string cw = where + ".camera";
  Camera cam;
  cam.fx = number_at(merged, "fx", cw);
  cam.fy = number_at(merged, "fy", cw);
  cam.cx = number_at(merged, "cx", cw);
  cam.cy = number_at(merged, "cy", cw);
  const double w = number_at(merged, "width", cw);
  const double h = number_at(merged, "height", cw);
  if (w != std::floor(w) || h != std::floor(h) || w < 1 || h < 1 || w > 1 << 15 || h > 1 << 15) {
    schema(cw, "width and height must be integers in [1, 32768]");
  }
  cam.width = static_cast<int>(w);
  cam.height = static_cast<int>(h);
  if (!(cam.fx > 0.0)) schema(cw + ".fx", "must be positive");
  if (!(cam.fy > 0.0)) schema(cw + ".fy", "must be positive");
  return cam;
}

class MeshCache {
 public:
  const Mesh& get(const std::filesystem::path& path, Instance instance) {
    const auto key = std::make_pair(path.lexically_normal().string(), instance);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      if (!std::filesystem::exists(path)) throw Error(ErrorCode::FileNotFound, path.string());
      it = cache_.emplace(key, load_obj(path, instance)).first;
    }
    return it->second;
  }

 private:
  std::map<std::pair<std::string, Instance>, Mesh> cache_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

Scene parse_one_scene(const json& root, const std::string& where, const std::filesystem::path& base,
                      MeshCache& meshes, std::optional<std::filesystem::path>& texture) {
  if (!root.contains(where)) schema(where, "missing");
  const json& scene = root.at(where);
  if (!scene.is_object()) schema(where, "expected an object");

  Scene out;
  out.camera = parse_camera(scene, root, where);

  const json* hand = lookup(scene, root, "hand_obj");
  if (hand == nullptr) schema(where + ".hand_obj", "missing");
  if (!hand->is_string()) schema(where + ".hand_obj", "expected a string");
  out.hand = meshes.get(resolve(base, hand->get<std::string>()), Instance::Hand);

  if (const json* obj = lookup(scene, root, "object_obj")) {
    if (!obj->is_string()) schema(where + ".object_obj", "expected a string");
    out.object = meshes.get(resolve(base, obj->get<std::string>()), Instance::Object);
  } else {
    out.object.instance = Instance::Object;
  }
  if (const json* tex = lookup(scene, root, "object_texture")) {
    if (!tex->is_string()) schema(where + ".object_texture", "expected a string");
    if (!texture) texture = resolve(base, tex->get<std::string>());
  }

  if (scene.contains("object_rotation")) {
    const auto r = numbers_at(scene, "object_rotation", 9, where);
    for (int i = 0; i < 9; ++i) out.object_pose.rotation(i / 3, i % 3) = r[static_cast<std::size_t>(i)];
    try {
      require_orthonormal(out.object_pose.rotation);
    } catch (const Error& e) {
      schema(where + ".object_rotation", e.detail());
    }
  }
  if (scene.contains("object_translation")) {
    const auto t = numbers_at(scene, "object_translation", 3, where);
    out.object_pose.translation = Vec3(t[0], t[1], t[2]);
  }
  if (scene.contains("image")) {
    out.image = resolve(base, string_at(scene, "image", where));
    if (!std::filesystem::exists(*out.image)) throw Error(ErrorCode::FileNotFound, out.image->string());
  }
  return out;
}

}  // namespace

namespace {

SceneConfig parse_scene_impl(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    schema("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) schema("<document>", "expected a JSON object");

  SceneConfig cfg;
  MeshCache meshes;
  cfg.source = parse_one_scene(root, "source", base_dir, meshes, cfg.object_texture);
  cfg.target = parse_one_scene(root, "target", base_dir, meshes, cfg.object_texture);
  if (cfg.object_texture && !std::filesystem::exists(*cfg.object_texture)) {
    throw Error(ErrorCode::FileNotFound, cfg.object_texture->string());
  }

  require_same_topology(cfg.source.hand, cfg.target.hand);
  try {
    require_same_topology(cfg.source.object, cfg.target.object);
  } catch (const Error& e) {
    throw Error(ErrorCode::TopologyMismatch, "object: " + e.detail());
  }

  if (root.contains("output")) {
    const json& o = root.at("output");
    if (!o.is_object()) schema("output", "expected an object");
    if (o.contains("atlas_size")) {
      const double v = number_at(o, "atlas_size", "output");
      if (v != std::floor(v) || v < 8 || v > 16384) schema("output.atlas_size", "must be an integer in [8, 16384]");
      cfg.options.atlas_size = static_cast<int>(v);
    }
    if (o.contains("atlas_margin")) cfg.options.atlas_margin = number_at(o, "atlas_margin", "output");
    if (o.contains("dilation_passes")) {
      cfg.options.dilation_passes = static_cast<int>(number_at(o, "dilation_passes", "output"));
    }
    if (o.contains("skip_fusion")) cfg.options.skip_fusion = o.at("skip_fusion").get<bool>();
    if (o.contains("dump_intermediate")) cfg.options.dump_intermediate = o.at("dump_intermediate").get<bool>();
  }
  return cfg;
}

}  // namespace

SceneConfig parse_scene_text(const std::string& json_text, const std::filesystem::path& base_dir) {
  try {
    return parse_scene_impl(json_text, base_dir);
  } catch (const json::exception& e) {
    schema("<document>", e.what());
  }
}

SceneConfig parse_scene(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::FileNotFound, path.string());
  SceneConfig cfg = parse_scene_text(read_text(path), path.parent_path());
  cfg.path = path;
  return cfg;
}

// ---------------------------------------------------------------------------
// Metrics inputs

namespace {

std::vector<Vec3> joints_at(const json& rec, const std::string& key, const std::string& where) {
  if (!rec.contains(key)) schema(where + ": " + key, "missing");
  const json& arr = rec.at(key);
  if (!arr.is_array()) schema(where + ": " + key, "expected an array of [x, y, z]");
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& p = arr[i];
    if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() || !p[2].is_number()) {
      schema(where + ": " + key + "[" + std::to_string(i) + "]", "expected [x, y, z]");
    }
    out.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
  }
  if (out.size() != metrics::kHandJointCount) {
    schema(where + ": " + key, "expected 21 joints, got " + std::to_string(out.size()));
  }
  return out;
}

RigidTransform pose_at(const json& rec, const std::string& r_key, const std::string& t_key,
                       const std::string& where) {
  for (const auto& k : {r_key, t_key}) {
    if (!rec.contains(k)) schema(where + ": " + k, "missing");
  }
  const auto r = numbers_at(rec, r_key, 9, where);
  const auto t = numbers_at(rec, t_key, 3, where);
  RigidTransform pose;
  for (int i = 0; i < 9; ++i) pose.rotation(i / 3, i % 3) = r[static_cast<std::size_t>(i)];
  pose.translation = Vec3(t[0], t[1], t[2]);
  try {
    require_orthonormal(pose.rotation);
  } catch (const Error& e) {
    schema(where + ": " + r_key, e.detail());
  }
  return pose;
}

}  // namespace

namespace {

std::vector<metrics::FrameRecord> parse_predictions_impl(const std::string& text) {
  std::vector<metrics::FrameRecord> frames;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      schema(where, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) schema(where, "expected a JSON object");

    metrics::FrameRecord f;
    if (rec.contains("frame_id")) {
      const json& id = rec.at("frame_id");
      f.frame_id = id.is_string() ? id.get<std::string>() : id.dump();
    } else {
      schema(where + ": frame_id", "missing");
    }
    f.pred_joints = joints_at(rec, "pred_joints", where);
    f.gt_joints = joints_at(rec, "gt_joints", where);
    f.pred_pose = pose_at(rec, "pred_R", "pred_t", where);
    f.gt_pose = pose_at(rec, "gt_R", "gt_t", where);
    if (!rec.contains("object_id")) schema(where + ": object_id", "missing");
    const json& oid = rec.at("object_id");
    f.object_id = oid.is_string() ? oid.get<std::string>() : oid.dump();
    frames.push_back(std::move(f));
  }
  if (frames.empty()) throw Error(ErrorCode::EmptyInput, "no prediction records");
  return frames;
}

}  // namespace

std::vector<metrics::FrameRecord> parse_predictions(const std::string& text) {
  try {
    return parse_predictions_impl(text);
  } catch (const json::exception& e) {
    schema("predictions", e.what());
  }
}

std::vector<metrics::FrameRecord> read_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text(path));
}

std::vector<std::pair<std::string, metrics::ObjectModel>> read_object_registry(
    const std::filesystem::path& path) {
  json root;
  try {
    root = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    schema("registry", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) schema("registry", "expected an object keyed by object_id");

  std::vector<std::pair<std::string, metrics::ObjectModel>> out;
  for (const auto& [id, entry] : root.items()) {
    const std::string where = "registry." + id;
    if (!entry.is_object()) schema(where, "expected an object");
    if (!entry.contains("vertices_path")) schema(where + ".vertices_path", "missing");
    const auto vpath = resolve(path.parent_path(), string_at(entry, "vertices_path", where));
    double scale = 1.0;
    if (entry.contains("units")) {
      const std::string units = string_at(entry, "units", where);
      if (units == "m") {
        scale = 1000.0;
      } else if (units != "mm") {
        schema(where + ".units", "expected \"mm\" or \"m\"");
      }
    }
    if (!std::filesystem::exists(vpath)) throw Error(ErrorCode::FileNotFound, vpath.string());
    metrics::ObjectModel model;
    model.vertices = load_obj_vertices(vpath);
    for (auto& v : model.vertices) v *= scale;
    if (entry.contains("diameter_mm") && !entry.at("diameter_mm").is_null()) {
      model.diameter = number_at(entry, "diameter_mm", where);
      if (!(model.diameter > 0.0)) schema(where + ".diameter_mm", "must be positive");
    } else {
      model.diameter = metrics::object_diameter(model.vertices);
    }
    out.emplace_back(id, std::move(model));
  }
  return out;
}

}  // namespace topoflow::io
