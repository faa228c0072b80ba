#pragma once

// Mesh/camera data model and the screen-space and atlas-space vertex
// coordinates every other stage consumes.
//
// Conventions shared by the whole library:
//  - camera frame: +z forward, +x right, +y down, meters
//  - image origin at the top-left corner; pixel (i, j) has its centre at
//    (i + 0.5, j + 0.5)
//  - Mesh::face_uvs follow the OBJ convention (v grows upwards); atlas pixel
//    coordinates are x = u * size, y = (1 - v) * size

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace topoflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using Face = std::array<int, 3>;
using FaceUv = std::array<Vec2, 3>;

enum class Instance : std::uint8_t { Background = 0, Hand = 1, Object = 2 };

inline constexpr double kDegenerateArea = 1e-12;

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::optional<std::vector<FaceUv>> face_uvs;
  Instance instance = Instance::Object;

  std::size_t vertex_count() const noexcept { return vertices.size(); }
  std::size_t face_count() const noexcept { return faces.size(); }
  bool has_uvs() const noexcept { return face_uvs.has_value(); }
};

// Throws IndexOutOfRange / SizeMismatch when a Mesh invariant is broken.
void validate(const Mesh& mesh);

// One flag per face: true when the 3D triangle area is <= kDegenerateArea.
// The rasterizer skips such faces because their projection is degenerate too.
std::vector<std::uint8_t> flag_degenerate_faces(const Mesh& mesh);

// Throws TopologyMismatch unless both meshes share one face list.
void require_same_topology(const Mesh& a, const Mesh& b);

struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
};

void validate(const Camera& camera);

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

struct Scene {
  Mesh hand;    // posed vertices, camera frame
  Mesh object;  // canonical vertices
  RigidTransform object_pose;
  Camera camera;
  std::optional<std::filesystem::path> image;
};

// Throws NonOrthonormal if |R R^T - I|_inf > 1e-6.
void require_orthonormal(const Mat3& rotation);

Mesh apply_rigid_transform(const Mesh& mesh, const RigidTransform& pose);

// Pixel x, pixel y, camera depth z (meters).
using ScreenCoords = std::vector<Vec3>;

// Pinhole projection; throws BehindCamera(index) when Z <= 1e-6.
ScreenCoords project(const Camera& camera, const Mesh& mesh);
ScreenCoords project(const Scene& scene, const Mesh& mesh);

// ---------------------------------------------------------------------------
// OBJ ingestion

// Reads v / vt / f records (f accepts v, v/vt, v//vn, v/vt/vn and negative
// indices); n-gons are fan-triangulated. Other record types are ignored.
Mesh load_obj(const std::filesystem::path& path, Instance instance = Instance::Object);
Mesh parse_obj(std::string_view text, Instance instance = Instance::Object);
// Vertex positions only; faces are optional (point-list files are accepted).
std::vector<Vec3> load_obj_vertices(const std::filesystem::path& path);

// Writes vertices with 9 significant digits, and per-corner vt records when
// the mesh has UVs.
void write_obj(const Mesh& mesh, const std::filesystem::path& path);
std::string format_obj(const Mesh& mesh);

// ---------------------------------------------------------------------------
// Unified surface space

struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool contains(double px, double py) const noexcept {
    return px >= x && py >= y && px <= x + width && py <= y + height;
  }
  bool intersects(const PixelRect& o) const noexcept {
    return x < o.x + o.width && o.x < x + width && y < o.y + o.height && o.y < y + height;
  }
};

// Placement of one instance inside the atlas.
struct InstanceAtlas {
  PixelRect rect;
  // Grid parameters; cells_per_row == 0 when the instance keeps its own UVs.
  int cells_per_row = 0;
  double cell_side = 0.0;
  double margin = 0.0;
};

struct AtlasLayout {
  int atlas_size = 1024;
  InstanceAtlas hand;
  InstanceAtlas object;

  // Hand gets the left half, object the right half.
  static AtlasLayout split(int atlas_size);
};

struct GridAtlasParams {
  PixelRect rect;
  int atlas_size = 1024;
  double margin = 1.0;
};

struct GridAtlas {
  std::vector<FaceUv> face_uvs;  // OBJ convention, normalized to the atlas
  InstanceAtlas placement;
};

// Cell (f mod A, f div A) with A = ceil(sqrt(N_f)); inside a cell of side c
// the face gets corners (m,m), (c-m,m), (m,c-m). Throws CellTooSmall when
// c - 2m < 2 px and EmptyMesh for a faceless mesh.
GridAtlas build_grid_atlas(const Mesh& mesh, const GridAtlasParams& params);

// Maps OBJ-convention UVs in [0,1]^2 affinely onto `rect`.
std::vector<FaceUv> place_uvs_in_rect(const std::vector<FaceUv>& uvs, const PixelRect& rect,
                                      int atlas_size);

// Normalized atlas UV (OBJ convention) <-> atlas pixel coordinates.
inline Vec2 uv_to_atlas_px(const Vec2& uv, int atlas_size) {
  return {uv.x() * atlas_size, (1.0 - uv.y()) * atlas_size};
}
inline Vec2 atlas_px_to_uv(const Vec2& px, int atlas_size) {
  return {px.x() / atlas_size, 1.0 - px.y() / atlas_size};
}

}  // namespace topoflow
