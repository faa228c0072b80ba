#include "topoflow/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "topoflow/error.hpp"

namespace topoflow {

void validate(const Mesh& mesh) {
  const auto n = static_cast<long long>(mesh.vertices.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (int idx : mesh.faces[f]) {
      if (idx < 0 || idx >= n) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                        " of " + std::to_string(n));
      }
    }
  }
  if (mesh.face_uvs && mesh.face_uvs->size() != mesh.faces.size()) {
    throw Error(ErrorCode::SizeMismatch, "face_uvs has " + std::to_string(mesh.face_uvs->size()) +
                                             " entries for " + std::to_string(mesh.faces.size()) +
                                             " faces");
  }
}

std::vector<std::uint8_t> flag_degenerate_faces(const Mesh& mesh) {
  std::vector<std::uint8_t> flags(mesh.faces.size(), 0);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& [a, b, c] = mesh.faces[f];
    const Vec3 e1 = mesh.vertices[b] - mesh.vertices[a];
    const Vec3 e2 = mesh.vertices[c] - mesh.vertices[a];
    flags[f] = 0.5 * e1.cross(e2).norm() <= kDegenerateArea ? 1 : 0;
  }
  return flags;
}

void require_same_topology(const Mesh& a, const Mesh& b) {
  if (a.faces.size() != b.faces.size()) {
    throw Error(ErrorCode::TopologyMismatch, "face counts differ (" +
                                                 std::to_string(a.faces.size()) + " vs " +
                                                 std::to_string(b.faces.size()) + ")");
  }
  if (a.vertices.size() != b.vertices.size()) {
    throw Error(ErrorCode::TopologyMismatch, "vertex counts differ (" +
                                                 std::to_string(a.vertices.size()) + " vs " +
                                                 std::to_string(b.vertices.size()) + ")");
  }
  for (std::size_t f = 0; f < a.faces.size(); ++f) {
    if (a.faces[f] != b.faces[f]) {
      throw Error(ErrorCode::TopologyMismatch, "face " + std::to_string(f) + " differs");
    }
  }
}

void validate(const Camera& camera) {
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0)) {
    throw Error(ErrorCode::SchemaError, "camera focal lengths must be positive");
  }
  if (camera.width < 1 || camera.height < 1) {
    throw Error(ErrorCode::SchemaError, "camera image size must be at least 1x1");
  }
}

void require_orthonormal(const Mat3& rotation) {
  const Mat3 residual = rotation * rotation.transpose() - Mat3::Identity();
  const double err = residual.cwiseAbs().maxCoeff();
  if (!(err <= 1e-6)) {
    throw Error(ErrorCode::NonOrthonormal,
                "|R R^T - I|_inf = " + std::to_string(err) + " exceeds 1e-6");
  }
}

Mesh apply_rigid_transform(const Mesh& mesh, const RigidTransform& pose) {
  require_orthonormal(pose.rotation);
  Mesh out = mesh;
  for (auto& v : out.vertices) v = pose.rotation * v + pose.translation;
  return out;
}

ScreenCoords project(const Camera& camera, const Mesh& mesh) {
  ScreenCoords out;
  out.reserve(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    if (!(v.z() > 1e-6)) {
      throw Error(ErrorCode::BehindCamera, "vertex " + std::to_string(i));
    }
    out.emplace_back(camera.fx * v.x() / v.z() + camera.cx, camera.fy * v.y() / v.z() + camera.cy,
                     v.z());
  }
  return out;
}

ScreenCoords project(const Scene& scene, const Mesh& mesh) { return project(scene.camera, mesh); }

}  // namespace topoflow
