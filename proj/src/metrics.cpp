#include "topoflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "topoflow/error.hpp"

namespace topoflow::metrics {
namespace {

Vec3 centroid(std::span<const Vec3> pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

// Rank of a centred point set from its scatter matrix singular values.
int spatial_rank(std::span<const Vec3> pts, const Vec3& mean) {
  Mat3 scatter = Mat3::Zero();
  for (const auto& p : pts) scatter += (p - mean) * (p - mean).transpose();
  const Eigen::JacobiSVD<Mat3> svd(scatter);
  const auto& s = svd.singularValues();
  if (!(s(0) > 1e-18)) return 0;
  int rank = 1;
  for (int i = 1; i < 3; ++i) rank += s(i) > 1e-12 * s(0) ? 1 : 0;
  return rank;
}

}  // namespace

ProcrustesResult procrustes_align(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::SizeMismatch, "point counts differ (" + std::to_string(pred.size()) +
                                             " vs " + std::to_string(gt.size()) + ")");
  }
  if (pred.size() < 3) throw Error(ErrorCode::SizeMismatch, "Procrustes needs at least 3 points");

  const Vec3 mu_p = centroid(pred);
  const Vec3 mu_g = centroid(gt);
  if (spatial_rank(gt, mu_g) < 2) {
    throw Error(ErrorCode::DegenerateConfiguration, "ground-truth points span fewer than 2 dimensions");
  }

  const double n = static_cast<double>(pred.size());
  Mat3 cov = Mat3::Zero();
  double var_p = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vec3 dp = pred[i] - mu_p;
    cov += (gt[i] - mu_g) * dp.transpose();
    var_p += dp.squaredNorm();
  }
  cov /= n;
  var_p /= n;
  if (!(var_p > 0.0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "predicted points are all coincident");
  }

  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 sign = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) sign(2) = -1.0;

  ProcrustesResult result;
  Similarity& sim = result.transform;
  sim.rotation = svd.matrixU() * sign.asDiagonal() * svd.matrixV().transpose();
  sim.scale = svd.singularValues().dot(sign) / var_p;
  sim.translation = mu_g - sim.scale * sim.rotation * mu_p;

  result.aligned.reserve(pred.size());
  for (const auto& p : pred) result.aligned.push_back(sim.apply(p));
  return result;
}

std::vector<double> aligned_joint_errors(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  const ProcrustesResult r = procrustes_align(pred, gt);
  std::vector<double> errors(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) errors[i] = (r.aligned[i] - gt[i]).norm();
  return errors;
}

double pa_mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.size() != kHandJointCount || gt.size() != kHandJointCount) {
    throw Error(ErrorCode::SizeMismatch, "PA-MPJPE expects 21 joints, got " +
                                             std::to_string(pred.size()) + " and " +
                                             std::to_string(gt.size()));
  }
  const auto errors = aligned_joint_errors(pred, gt);
  double sum = 0.0;
  for (double e : errors) sum += e;
  return sum / static_cast<double>(errors.size());
}

double pck_auc(std::span<const double> errors, PckRange range) {
  if (errors.empty()) throw Error(ErrorCode::EmptyInput, "no joint errors");
  if (!(range.t_max_mm > 0.0) || range.steps < 1) {
    throw Error(ErrorCode::SchemaError, "PCK range needs t_max > 0 and steps >= 1");
  }
  std::vector<double> sorted(errors.begin(), errors.end());
  for (double e : sorted) {
    if (!(e >= 0.0)) throw Error(ErrorCode::SchemaError, "joint errors must be non-negative");
  }
  std::sort(sorted.begin(), sorted.end());

  const double n = static_cast<double>(sorted.size());
  auto pck = [&](double tau) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), tau + kPckSlackMm) - sorted.begin()) / n;
  };
  double area = 0.0;
  double prev = pck(0.0);
  for (int k = 1; k <= range.steps; ++k) {
    const double cur = pck(range.t_max_mm * k / range.steps);
    area += 0.5 * (prev + cur);
    prev = cur;
  }
  return 100.0 * area / range.steps;
}

double add_distance(const RigidTransform& pred, const RigidTransform& gt,
                    std::span<const Vec3> vertices) {
  if (vertices.empty()) throw Error(ErrorCode::EmptyVertices, "object has no vertices");
  double sum = 0.0;
  for (const auto& v : vertices) {
    sum += ((pred.rotation * v + pred.translation) - (gt.rotation * v + gt.translation)).norm();
  }
  return sum / static_cast<double>(vertices.size());
}

AddResult add_01d(const RigidTransform& pred, const RigidTransform& gt,
                  std::span<const Vec3> vertices, double diameter) {
  if (!(diameter > 0.0)) throw Error(ErrorCode::SchemaError, "object diameter must be positive");
  const double add = add_distance(pred, gt, vertices);
  return {add, add < 0.1 * diameter};
}

double object_diameter(std::span<const Vec3> vertices) {
  if (vertices.empty()) throw Error(ErrorCode::EmptyVertices, "object has no vertices");
  double best = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      best = std::max(best, (vertices[i] - vertices[j]).squaredNorm());
    }
  }
  return std::sqrt(best);
}

Report evaluate(std::span<const FrameRecord> frames,
                const std::vector<std::pair<std::string, ObjectModel>>& registry, PckRange range) {
  if (frames.empty()) throw Error(ErrorCode::EmptyInput, "no frames");
  std::map<std::string, const ObjectModel*> models;
  for (const auto& [id, model] : registry) models[id] = &model;

  std::map<std::string, ObjectScore> scores;
  std::map<std::string, double> add_sums;
  std::vector<double> pooled;
  pooled.reserve(frames.size() * kHandJointCount);
  double mpjpe_sum = 0.0;

  for (const auto& frame : frames) {
    const auto errors = aligned_joint_errors(frame.pred_joints, frame.gt_joints);
    if (errors.size() != kHandJointCount) {
      throw Error(ErrorCode::SizeMismatch, "frame " + frame.frame_id + ": expected 21 joints");
    }
    double frame_sum = 0.0;
    for (double e : errors) frame_sum += e;
    mpjpe_sum += frame_sum / kHandJointCount;
    pooled.insert(pooled.end(), errors.begin(), errors.end());

    const auto it = models.find(frame.object_id);
    if (it == models.end()) {
      throw Error(ErrorCode::SchemaError,
                  "frame " + frame.frame_id + ": unknown object_id '" + frame.object_id + "'");
    }
    require_orthonormal(frame.pred_pose.rotation);
    require_orthonormal(frame.gt_pose.rotation);
    const auto r = add_01d(frame.pred_pose, frame.gt_pose, it->second->vertices, it->second->diameter);
    ObjectScore& s = scores[frame.object_id];
    s.object_id = frame.object_id;
    ++s.frames;
    s.passed += r.pass ? 1 : 0;
    add_sums[frame.object_id] += r.add;
  }

  Report report;
  report.frames = static_cast<int>(frames.size());
  report.hand_auc = pck_auc(pooled, range);
  report.hand_pa_mpjpe = mpjpe_sum / static_cast<double>(frames.size());
  double avg = 0.0;
  for (auto& [id, s] : scores) {
    s.mean_add = add_sums[id] / s.frames;
    s.add_01d_percent = 100.0 * s.passed / s.frames;
    avg += s.add_01d_percent;
    report.objects.push_back(s);
  }
  report.average_add_01d = avg / static_cast<double>(report.objects.size());
  return report;
}

}  // namespace topoflow::metrics
