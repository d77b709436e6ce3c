// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "depropose/common.hpp"
#include "depropose/geometry.hpp"

namespace depropose {

// --------------------------------------------------------------------------
// Per-frame metrics
// --------------------------------------------------------------------------

// Mean per-joint position error: (1/J) * sum_j ||pred_j - gt_j||, in mm.
inline double mpjpe(const Pose3D& pred, const Pose3D& gt) {
  if (pred.joint_count() != gt.joint_count())
    throw ShapeMismatchError("mpjpe: joint counts differ (" +
                             std::to_string(pred.joint_count()) + " vs " +
                             std::to_string(gt.joint_count()) + ")");
  if (pred.joint_count() == 0) throw ValidationError("mpjpe: empty poses");
  if (!pred.all_finite() || !gt.all_finite())
    throw ValidationError("mpjpe: poses must be finite");
  return (pred.joints - gt.joints).rowwise().norm().mean();
}

// Rigid (optionally similarity) map applied to predictions during Procrustes
// alignment: x -> scale * rotation * x + translation.
struct RigidTransform {
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();
  double scale = 1.0;  // stays 1 unless alignment ran with_scale

  Vector3 apply(const Vector3& x) const {
    return scale * (rotation * x) + translation;
  }
};

struct AlignmentResult {
  RigidTransform transform;
  Pose3D aligned;  // transform applied to every predicted joint
};

// Least-squares rigid alignment of pred onto gt (orthogonal Procrustes with
// the Kabsch sign correction, reflections excluded). With with_scale the
// optimal uniform scale is estimated as well. Degenerate point sets — fewer
// than three joints or an (effectively) collinear ground truth — cannot pin
// down a unique rotation and raise DegenerateAlignmentError.
inline AlignmentResult procrustes_align(const Pose3D& pred, const Pose3D& gt,
                                        bool with_scale = false) {
  if (pred.joint_count() != gt.joint_count())
    throw ShapeMismatchError("procrustes_align: joint counts differ (" +
                             std::to_string(pred.joint_count()) + " vs " +
                             std::to_string(gt.joint_count()) + ")");
  const int j_count = pred.joint_count();
  if (j_count < 3)
    throw DegenerateAlignmentError(
        "procrustes_align: need at least 3 joints, got " +
        std::to_string(j_count));
  if (!pred.all_finite() || !gt.all_finite())
    throw ValidationError("procrustes_align: poses must be finite");

  const Eigen::RowVector3d pred_mean = pred.joints.colwise().mean();
  const Eigen::RowVector3d gt_mean = gt.joints.colwise().mean();
  const Eigen::MatrixXd p_c = pred.joints.rowwise() - pred_mean;
  const Eigen::MatrixXd g_c = gt.joints.rowwise() - gt_mean;

  // Collinearity gate on the target configuration: with rank < 2 the
  // rotation about the point line is free and the optimum is not unique.
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> shape_svd(g_c);
    const Eigen::VectorXd& sv = shape_svd.singularValues();
    if (sv(1) < 1e-9 * sv(0) || sv(0) == 0.0)
      throw DegenerateAlignmentError(
          "procrustes_align: ground-truth joints are collinear; rotation is "
          "not unique");
  }

  const Matrix3 h = p_c.transpose() * g_c;  // 3x3 cross-covariance
  Eigen::JacobiSVD<Matrix3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3 u = svd.matrixU();
  const Matrix3 v = svd.matrixV();
  Vector3 d_sign(1.0, 1.0, 1.0);
  if ((v * u.transpose()).determinant() < 0.0) d_sign(2) = -1.0;
  const Matrix3 rotation = v * d_sign.asDiagonal() * u.transpose();

  double scale = 1.0;
  if (with_scale) {
    const double denom = p_c.squaredNorm();
    if (denom == 0.0)
      throw DegenerateAlignmentError(
          "procrustes_align: predicted joints are coincident; scale is "
          "undefined");
    scale = (svd.singularValues().array() * d_sign.array()).sum() / denom;
  }

  AlignmentResult result;
  result.transform.rotation = rotation;
  result.transform.scale = scale;
  result.transform.translation =
      gt_mean.transpose() - scale * (rotation * pred_mean.transpose());
  result.aligned.joints =
      (scale * (rotation * pred.joints.transpose())).transpose();
  result.aligned.joints.rowwise() += result.transform.translation.transpose();
  return result;
}

// MPJPE after Procrustes alignment of pred onto gt.
inline double p_mpjpe(const Pose3D& pred, const Pose3D& gt,
                      bool with_scale = false) {
  return mpjpe(procrustes_align(pred, gt, with_scale).aligned, gt);
}

// --------------------------------------------------------------------------
// Aggregation
// --------------------------------------------------------------------------

// One evaluated frame, tagged with the action it belongs to.
struct FrameMetric {
  std::string action;
  double mpjpe_mm = 0.0;
  double p_mpjpe_mm = 0.0;
};

struct MetricReport {
  struct Row {
    std::string action;
    double mpjpe_mm = 0.0;    // mean over the action's frames
    double p_mpjpe_mm = 0.0;
    long frames = 0;
  };
  std::vector<Row> actions;  // sorted by action name
  Row overall;               // frame-weighted mean, action label "ALL"
};

// Per-action means plus the frame-weighted overall average. Row order is
// alphabetical by action so reports are reproducible.
inline MetricReport aggregate(std::span<const FrameMetric> frames) {
  if (frames.empty()) throw ValidationError("aggregate: no frames");
  struct Sums {
    double mpjpe = 0.0;
    double p_mpjpe = 0.0;
    long n = 0;
  };
  std::map<std::string, Sums> by_action;  // ordered map: sorted output
  Sums total;
  for (const FrameMetric& f : frames) {
    Sums& s = by_action[f.action];
    s.mpjpe += f.mpjpe_mm;
    s.p_mpjpe += f.p_mpjpe_mm;
    s.n += 1;
    total.mpjpe += f.mpjpe_mm;
    total.p_mpjpe += f.p_mpjpe_mm;
    total.n += 1;
  }
  MetricReport report;
  for (const auto& [action, s] : by_action) {
    MetricReport::Row row;
    row.action = action;
    row.mpjpe_mm = s.mpjpe / static_cast<double>(s.n);
    row.p_mpjpe_mm = s.p_mpjpe / static_cast<double>(s.n);
    row.frames = s.n;
    report.actions.push_back(row);
  }
  report.overall.action = "ALL";
  report.overall.mpjpe_mm = total.mpjpe / static_cast<double>(total.n);
  report.overall.p_mpjpe_mm = total.p_mpjpe / static_cast<double>(total.n);
  report.overall.frames = total.n;
  return report;
}

// CSV form: one row per action plus the frame-weighted ALL summary row.
// Fixed six-decimal formatting keeps the bytes reproducible.
inline std::string to_csv(const MetricReport& report) {
  std::string out = "action,mpjpe,p_mpjpe,frames\n";
  auto emit = [&out](const MetricReport::Row& row) {
    out += row.action;
    out += ',';
    out += to_fixed(row.mpjpe_mm, 6);
    out += ',';
    out += to_fixed(row.p_mpjpe_mm, 6);
    out += ',';
    out += std::to_string(row.frames);
    out += '\n';
  };
  for (const auto& row : report.actions) emit(row);
  emit(report.overall);
  return out;
}

inline nlohmann::ordered_json to_json(const MetricReport& report) {
  auto row_json = [](const MetricReport::Row& row) {
    return nlohmann::ordered_json{{"action", row.action},
                                  {"mpjpe", row.mpjpe_mm},
                                  {"p_mpjpe", row.p_mpjpe_mm},
                                  {"frames", row.frames}};
  };
  nlohmann::ordered_json doc;
  doc["actions"] = nlohmann::ordered_json::array();
  for (const auto& row : report.actions) doc["actions"].push_back(row_json(row));
  doc["overall"] = row_json(report.overall);
  return doc;
}

}  // namespace depropose
