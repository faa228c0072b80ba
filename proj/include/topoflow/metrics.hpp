#pragma once

// Structure-preservation metrics: PA-MPJPE, 3D PCK AUC, ADD / ADD-0.1D.
// Lengths are millimeters throughout.

#include <span>
#include <string>
#include <vector>

#include "topoflow/geometry.hpp"

namespace topoflow::metrics {

inline constexpr int kHandJointCount = 21;

struct Similarity {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};

struct ProcrustesResult {
  Similarity transform;
  std::vector<Vec3> aligned;
};

// Similarity minimizing sum |s R p_i + t - g_i|^2 with det(R) = +1.
// Throws SizeMismatch on differing or < 3 counts, DegenerateConfiguration
// when gt (or pred) spans fewer than two dimensions.
ProcrustesResult procrustes_align(std::span<const Vec3> pred, std::span<const Vec3> gt);

// Per-joint distances after Procrustes alignment.
std::vector<double> aligned_joint_errors(std::span<const Vec3> pred, std::span<const Vec3> gt);

// Mean of aligned_joint_errors. Expects 21 joints (SizeMismatch otherwise).
double pa_mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt);

struct PckRange {
  double t_max_mm = 50.0;
  int steps = 100;
};

// Alignment leaves residuals around 1e-14 mm on exact matches; errors within
// this slack of a threshold count as meeting it.
inline constexpr double kPckSlackMm = 1e-9;

// Trapezoidal mean of PCK(tau) over `steps` uniform intervals of
// [0, t_max], times 100. PCK(tau) counts errors <= tau + kPckSlackMm.
// Throws EmptyInput on no errors.
double pck_auc(std::span<const double> errors, PckRange range = {});

struct AddResult {
  double add = 0.0;
  bool pass = false;
};

// Mean vertex distance between the two poses; pass iff add < 0.1 * diameter.
// Throws EmptyVertices on an empty vertex list.
double add_distance(const RigidTransform& pred, const RigidTransform& gt,
                    std::span<const Vec3> vertices);
AddResult add_01d(const RigidTransform& pred, const RigidTransform& gt,
                  std::span<const Vec3> vertices, double diameter);

// Exact maximum pairwise distance. Throws EmptyVertices.
double object_diameter(std::span<const Vec3> vertices);

// ---------------------------------------------------------------------------
// Dataset aggregation

struct FrameRecord {
  std::string frame_id;
  std::vector<Vec3> pred_joints;
  std::vector<Vec3> gt_joints;
  RigidTransform pred_pose;
  RigidTransform gt_pose;
  std::string object_id;
};

struct ObjectModel {
  std::vector<Vec3> vertices;
  double diameter = 0.0;
};

struct ObjectScore {
  std::string object_id;
  int frames = 0;
  int passed = 0;
  double mean_add = 0.0;
  double add_01d_percent = 0.0;
};

struct Report {
  int frames = 0;
  double hand_auc = 0.0;
  double hand_pa_mpjpe = 0.0;
  std::vector<ObjectScore> objects;  // sorted by object id
  double average_add_01d = 0.0;       // mean over objects
};

// Hand AUC pools Procrustes-aligned per-joint errors over all frames.
// Throws EmptyInput for no frames and SchemaError for unknown object ids.
Report evaluate(std::span<const FrameRecord> frames,
                const std::vector<std::pair<std::string, ObjectModel>>& registry,
                PckRange range = {});

}  // namespace topoflow::metrics
