#pragma once

// File formats: PNG images and masks, the TFLO/TMAP float-field container,
// scene configuration JSON and the metrics JSONL/registry inputs.
//
// TFLO / TMAP layout (all little-endian):
//   offset 0   4 bytes  magic "TFLO" (flow, depth) or "TMAP" (topology map)
//   offset 4   u32      version = 1
//   offset 8   u32      width
//   offset 12  u32      height
//   offset 16  u32      channels (2 for flow/topology, 1 for depth)
//   offset 20  f32[]    width*height*channels values, row-major, top row
//                       first, channel-interleaved; invalid entries are NaN

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "topoflow/flow.hpp"
#include "topoflow/geometry.hpp"
#include "topoflow/grid.hpp"
#include "topoflow/metrics.hpp"

namespace topoflow::io {

// ---------------------------------------------------------------------------
// PNG

void write_png(const Image& image, const std::filesystem::path& path);
// Writes {0, 1} masks as {0, 255}; any nonzero byte counts as set.
void write_mask_png(const Mask& mask, const std::filesystem::path& path);
void write_gray16_png(const Grid<std::uint16_t>& gray, const std::filesystem::path& path);

struct DecodedPng {
  enum class Kind { Rgba8, Gray8, Gray16 };
  Kind kind = Kind::Rgba8;
  Image rgba;
  Grid<std::uint8_t> gray;
  Grid<std::uint16_t> gray16;
};

// Any 8-bit or 16-bit PNG; colour types other than gray are expanded to RGBA8.
DecodedPng read_png_any(const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);
// Decodes a grayscale mask; values > 127 become 1.
Mask read_mask_png(const std::filesystem::path& path);

// Face index + 1, clamped to 65535; background stays 0.
Grid<std::uint16_t> face_map_to_gray16(const Grid<std::int32_t>& face);

// ---------------------------------------------------------------------------
// TFLO / TMAP

inline constexpr std::uint32_t kTfloVersion = 1;
inline constexpr std::size_t kTfloHeaderBytes = 20;

enum class FieldKind { Flow, Topology };

struct FloatField {
  FieldKind kind = FieldKind::Flow;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;
  std::vector<float> values;
};

std::vector<std::uint8_t> encode_field(const FloatField& field);
// Throws BadMagic, UnsupportedVersion, TruncatedPayload.
FloatField decode_field(std::span<const std::uint8_t> bytes);

void write_field(const FloatField& field, const std::filesystem::path& path);
FloatField read_field(const std::filesystem::path& path);

FloatField to_field(const FlowField& flow);
FloatField to_field(const TopologyMap& map);
FloatField to_field(const Grid<float>& depth);

// Throws SizeMismatch when the channel count does not fit the target type.
FlowField to_flow(const FloatField& field);
TopologyMap to_topology(const FloatField& field);
Grid<float> to_depth(const FloatField& field);

void write_tflo(const FlowField& flow, const std::filesystem::path& path);
void write_tflo(const Grid<float>& depth, const std::filesystem::path& path);
void write_tmap(const TopologyMap& map, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Scene configuration

struct RunOptions {
  int atlas_size = 1024;
  double atlas_margin = 1.0;
  int dilation_passes = kDefaultDilationPasses;
  bool skip_fusion = false;
  bool dump_intermediate = false;
};

struct SceneConfig {
  std::filesystem::path path;
  Scene source;
  Scene target;
  std::optional<std::filesystem::path> object_texture;
  RunOptions options;
};

// Document: {"source": {...}, "target": {...}, "output": {...}}. Keys
// hand_obj, object_obj, object_texture and camera may also sit at the top
// level as defaults for both scenes. Relative paths resolve against the
// config file's directory.
// Throws SchemaError(field path), FileNotFound, TopologyMismatch.
SceneConfig parse_scene(const std::filesystem::path& path);
SceneConfig parse_scene_text(const std::string& json_text, const std::filesystem::path& base_dir);

// ---------------------------------------------------------------------------
// Metrics inputs

// One JSON object per non-blank line. Throws SchemaError("line N: ...") and
// EmptyInput when no record is present.
std::vector<metrics::FrameRecord> read_predictions(const std::filesystem::path& path);
std::vector<metrics::FrameRecord> parse_predictions(const std::string& text);

// {object_id: {vertices_path, diameter_mm?, units?}}; units is "mm" (default)
// or "m". A missing diameter is computed from the vertices.
std::vector<std::pair<std::string, metrics::ObjectModel>> read_object_registry(
    const std::filesystem::path& path);

}  // namespace topoflow::io
