// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "depropose/common.hpp"

namespace depropose {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;
using Matrix34 = Eigen::Matrix<double, 3, 4>;
// Joint tables are row-per-joint: J x 3 in millimetres, J x 2 in pixels.
using JointMatrix3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using JointMatrix2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

// Coordinates of joints that a camera cannot see (behind it, z <= 0) carry
// this sentinel. Joints outside the image rectangle keep their real
// projected coordinates and are merely flagged invisible.
inline constexpr double kCoordSentinel =
    std::numeric_limits<double>::quiet_NaN();

// Rays whose DLT condition number exceeds this are reported as
// ill-conditioned (near-parallel viewing directions).
inline constexpr double kIllConditionedThreshold = 1e10;

// --------------------------------------------------------------------------
// Core value types
// --------------------------------------------------------------------------

// Calibrated pinhole camera. `rotation` and `translation` map world points
// into the camera frame (x_cam = R * x_world + t); +z looks down the optical
// axis, +x right, +y down in the image.
struct CameraParams {
  double fx = 0.0;  // focal lengths, px
  double fy = 0.0;
  double cx = 0.0;  // principal point, px
  double cy = 0.0;
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();  // mm
  int width = 0;   // image size, px
  int height = 0;
  int view_id = 0;

  // Camera centre in world coordinates: C = -R^T t.
  Vector3 center() const { return -rotation.transpose() * translation; }

  // 3x4 projection matrix P = K [R | t].
  Matrix34 projection_matrix() const {
    Matrix3 k = Matrix3::Zero();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = cx;
    k(1, 2) = cy;
    k(2, 2) = 1.0;
    Matrix34 rt;
    rt.leftCols<3>() = rotation;
    rt.col(3) = translation;
    return k * rt;
  }
};

// Checks the documented camera invariants: positive focals and image size,
// and a right-handed orthonormal rotation (within 1e-9).
inline void validate_camera(const CameraParams& cam) {
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0))
    throw ValidationError("camera " + std::to_string(cam.view_id) +
                          ": focal lengths must be positive");
  if (cam.width <= 0 || cam.height <= 0)
    throw ValidationError("camera " + std::to_string(cam.view_id) +
                          ": image size must be positive");
  if (!cam.rotation.allFinite() || !cam.translation.allFinite() ||
      !std::isfinite(cam.cx) || !std::isfinite(cam.cy))
    throw ValidationError("camera " + std::to_string(cam.view_id) +
                          ": parameters must be finite");
  if (!(cam.cx >= 0.0 && cam.cx < cam.width) ||
      !(cam.cy >= 0.0 && cam.cy < cam.height))
    throw ValidationError("camera " + std::to_string(cam.view_id) +
                          ": principal point lies outside the image");
  const Matrix3 rtr = cam.rotation.transpose() * cam.rotation;
  if ((rtr - Matrix3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw ValidationError("camera " + std::to_string(cam.view_id) +
                          ": rotation is not orthonormal");
  if (std::abs(cam.rotation.determinant() - 1.0) > 1e-9)
    throw ValidationError("camera " + std::to_string(cam.view_id) +
                          ": rotation is not right-handed");
}

// A 3D pose: one row of world-frame millimetres per joint.
struct Pose3D {
  JointMatrix3 joints;

  int joint_count() const { return static_cast<int>(joints.rows()); }
  bool all_finite() const { return joints.allFinite(); }

  static Pose3D zeros(int j) {
    Pose3D p;
    p.joints = JointMatrix3::Zero(j, 3);
    return p;
  }
};

// A 2D observation: pixel coordinates plus a per-joint visibility flag.
// Invisible joints either keep real out-of-frame coordinates (outside the
// image rectangle) or carry NaN sentinels (behind the camera / dropped).
struct Pose2D {
  JointMatrix2 joints;
  std::vector<bool> visibility;

  int joint_count() const { return static_cast<int>(joints.rows()); }
  int visible_count() const {
    int n = 0;
    for (const bool v : visibility) n += v ? 1 : 0;
    return n;
  }

  static Pose2D hidden(int j) {
    Pose2D p;
    p.joints = JointMatrix2::Constant(j, 2, kCoordSentinel);
    p.visibility.assign(static_cast<std::size_t>(j), false);
    return p;
  }
};

inline void validate_pose2d(const Pose2D& obs) {
  if (obs.visibility.size() != static_cast<std::size_t>(obs.joints.rows()))
    throw ShapeMismatchError("observation visibility length " +
                             std::to_string(obs.visibility.size()) +
                             " does not match joint count " +
                             std::to_string(obs.joints.rows()));
  for (int j = 0; j < obs.joint_count(); ++j) {
    if (obs.visibility[static_cast<std::size_t>(j)] &&
        (!std::isfinite(obs.joints(j, 0)) || !std::isfinite(obs.joints(j, 1))))
      throw ValidationError("visible joint " + std::to_string(j) +
                            " has non-finite coordinates");
  }
}

// Direction from a camera to a target point, as angles plus the smooth
// four-component encoding used wherever view direction enters a feature.
struct RayEncoding {
  double azimuth = 0.0;    // (-pi, pi], from +X toward +Y in the XY plane
  double elevation = 0.0;  // [-pi/2, pi/2], from the XY plane toward +Z
  std::array<double, 4> encoded{{0.0, 1.0, 0.0, 1.0}};  // sin/cos az, sin/cos el
};

// --------------------------------------------------------------------------
// Projection and rays
// --------------------------------------------------------------------------

// Projects every joint through the pinhole model. Joints at or behind the
// camera plane (z_cam <= 0) are invisible with sentinel coordinates; joints
// in front but outside the image rectangle are invisible with their real
// coordinates retained.
inline Pose2D project(const Pose3D& pose, const CameraParams& cam) {
  validate_camera(cam);
  if (!pose.all_finite())
    throw ValidationError("cannot project a pose with non-finite joints");
  const int j_count = pose.joint_count();
  Pose2D out;
  out.joints.resize(j_count, 2);
  out.visibility.assign(static_cast<std::size_t>(j_count), false);
  for (int j = 0; j < j_count; ++j) {
    const Vector3 pc =
        cam.rotation * pose.joints.row(j).transpose() + cam.translation;
    if (!(pc.z() > 0.0)) {
      out.joints(j, 0) = kCoordSentinel;
      out.joints(j, 1) = kCoordSentinel;
      continue;
    }
    const double u = cam.fx * pc.x() / pc.z() + cam.cx;
    const double v = cam.fy * pc.y() / pc.z() + cam.cy;
    out.joints(j, 0) = u;
    out.joints(j, 1) = v;
    out.visibility[static_cast<std::size_t>(j)] =
        u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height;
  }
  return out;
}

// Angles of the ray from the camera centre to `target`. Azimuth is measured
// from +X toward +Y and lies in (-pi, pi]; elevation from the XY plane in
// [-pi/2, +pi/2]. Straight up/down has undefined azimuth; it is fixed to 0
// so the encoding stays a total function away from the zero-length case.
inline RayEncoding view_ray_angles(const CameraParams& cam,
                                   const Vector3& target) {
  const Vector3 d = target - cam.center();
  const double r = d.norm();
  if (!(r > 1e-12))
    throw DegenerateRayError(
        "view ray undefined: target coincides with the camera centre");
  const Vector3 u = d / r;
  const double horizontal = std::hypot(u.x(), u.y());
  RayEncoding enc;
  enc.elevation = std::atan2(u.z(), horizontal);
  enc.azimuth = horizontal == 0.0 ? 0.0 : std::atan2(u.y(), u.x());
  if (enc.azimuth <= -M_PI) enc.azimuth = M_PI;  // fold the -pi branch cut
  enc.encoded = {std::sin(enc.azimuth), std::cos(enc.azimuth),
                 std::sin(enc.elevation), std::cos(enc.elevation)};
  return enc;
}

// --------------------------------------------------------------------------
// Triangulation
// --------------------------------------------------------------------------

namespace detail {

// Solves one homogeneous DLT system built from (P, pixel, weight) triples:
// each view contributes rows w*(u*P3 - P1) and w*(v*P3 - P2). Returns the
// dehomogenised point from the smallest right singular vector and reports
// the system's condition number through `condition`.
inline Vector3 dlt_point(std::span<const Matrix34> projections,
                         std::span<const Eigen::Vector2d> pixels,
                         std::span<const double> weights, double* condition) {
  const std::size_t n = projections.size();
  Eigen::MatrixXd a(2 * n, 4);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix34& p = projections[i];
    const double w = weights.empty() ? 1.0 : weights[i];
    a.row(static_cast<Eigen::Index>(2 * i)) =
        w * (pixels[i].x() * p.row(2) - p.row(0));
    a.row(static_cast<Eigen::Index>(2 * i + 1)) =
        w * (pixels[i].y() * p.row(2) - p.row(1));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (condition) {
    const double denom = sv(2);
    *condition = denom > 0.0 ? sv(0) / denom
                             : std::numeric_limits<double>::infinity();
  }
  Eigen::Vector4d x = svd.matrixV().col(3);
  double w = x(3);
  if (w == 0.0) {
    // Solution at infinity (exactly parallel rays). Return a far point along
    // the homogeneous direction instead of dividing by zero; the caller has
    // already been told the system is ill-conditioned.
    w = 1e-15 * std::max(1.0, x.head<3>().norm());
  }
  return x.head<3>() / w;
}

}  // namespace detail

struct TriangulationResult {
  Pose3D pose;
  // Joints whose DLT system had condition number > kIllConditionedThreshold
  // (near-parallel rays). Their coordinates are still returned.
  std::vector<int> ill_conditioned_joints;
};

// Per-joint linear (DLT) triangulation across views. A joint uses the views
// in which it is visible with finite coordinates and — when `weights` is
// given — a strictly positive weight; zero-weight views are excluded from
// the system entirely, so weight 0 is bit-identical to omitting the view.
// Throws UnderdeterminedJointError for any joint with fewer than two usable
// views.
inline TriangulationResult triangulate(
    const std::vector<Pose2D>& observations,
    const std::vector<CameraParams>& cameras,
    std::span<const double> weights = {}) {
  if (observations.size() != cameras.size())
    throw ShapeMismatchError(
        "triangulate: " + std::to_string(observations.size()) +
        " observations for " + std::to_string(cameras.size()) + " cameras");
  if (observations.empty())
    throw ValidationError("triangulate: no views supplied");
  if (!weights.empty() && weights.size() != observations.size())
    throw ShapeMismatchError("triangulate: weight count " +
                             std::to_string(weights.size()) +
                             " does not match view count " +
                             std::to_string(observations.size()));
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ValidationError(
          "triangulate: weights must be finite and non-negative");
  }
  const int view_count = static_cast<int>(observations.size());
  const int joint_count = observations.front().joint_count();
  std::vector<Matrix34> projections;
  projections.reserve(static_cast<std::size_t>(view_count));
  for (int v = 0; v < view_count; ++v) {
    validate_camera(cameras[static_cast<std::size_t>(v)]);
    validate_pose2d(observations[static_cast<std::size_t>(v)]);
    if (observations[static_cast<std::size_t>(v)].joint_count() != joint_count)
      throw ShapeMismatchError(
          "triangulate: view " + std::to_string(v) + " has " +
          std::to_string(observations[static_cast<std::size_t>(v)]
                             .joint_count()) +
          " joints, expected " + std::to_string(joint_count));
    projections.push_back(
        cameras[static_cast<std::size_t>(v)].projection_matrix());
  }

  TriangulationResult result;
  result.pose.joints.resize(joint_count, 3);
  std::vector<Matrix34> usable_p;
  std::vector<Eigen::Vector2d> usable_px;
  std::vector<double> usable_w;
  for (int j = 0; j < joint_count; ++j) {
    usable_p.clear();
    usable_px.clear();
    usable_w.clear();
    for (int v = 0; v < view_count; ++v) {
      const Pose2D& obs = observations[static_cast<std::size_t>(v)];
      if (!obs.visibility[static_cast<std::size_t>(j)]) continue;
      if (!std::isfinite(obs.joints(j, 0)) || !std::isfinite(obs.joints(j, 1)))
        continue;
      if (!weights.empty() && !(weights[static_cast<std::size_t>(v)] > 0.0))
        continue;
      usable_p.push_back(projections[static_cast<std::size_t>(v)]);
      usable_px.emplace_back(obs.joints(j, 0), obs.joints(j, 1));
      usable_w.push_back(weights.empty()
                             ? 1.0
                             : weights[static_cast<std::size_t>(v)]);
    }
    if (usable_p.size() < 2) throw UnderdeterminedJointError(j);
    double condition = 0.0;
    const Vector3 x =
        detail::dlt_point(usable_p, usable_px, usable_w, &condition);
    if (!(condition <= kIllConditionedThreshold))
      result.ill_conditioned_joints.push_back(j);
    result.pose.joints.row(j) = x.transpose();
  }
  return result;
}

// --------------------------------------------------------------------------
// Rig construction
// --------------------------------------------------------------------------

// Builds a camera at `eye` looking at `target`, world +Z treated as up (the
// image y axis points down as usual). When the viewing direction is within
// ~1e-9 of vertical, +Y is used as the up reference instead.
inline CameraParams look_at_camera(const Vector3& eye, const Vector3& target,
                                   double fx, double fy, int width, int height,
                                   int view_id = 0) {
  Vector3 forward = target - eye;
  const double dist = forward.norm();
  if (!(dist > 1e-9))
    throw ValidationError("look_at_camera: eye coincides with target");
  forward /= dist;
  Vector3 up(0.0, 0.0, 1.0);
  if (std::abs(forward.dot(up)) > 1.0 - 1e-9) up = Vector3(0.0, 1.0, 0.0);
  const Vector3 right = forward.cross(up).normalized();
  const Vector3 image_down = forward.cross(right).normalized();
  CameraParams cam;
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = image_down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -cam.rotation * eye;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  cam.view_id = view_id;
  validate_camera(cam);
  return cam;
}

// Evenly spaced ring of `views` cameras at the given radius and height, all
// aimed at `target`. View v sits at azimuth 2*pi*v/views from +X.
inline std::vector<CameraParams> circular_rig(int views, double radius_mm,
                                              double height_mm,
                                              const Vector3& target, double fx,
                                              double fy, int width,
                                              int height) {
  if (views < 1) throw ValidationError("circular_rig: need at least one view");
  if (!(radius_mm > 0.0))
    throw ValidationError("circular_rig: radius must be positive");
  std::vector<CameraParams> rig;
  rig.reserve(static_cast<std::size_t>(views));
  for (int v = 0; v < views; ++v) {
    const double phi = 2.0 * M_PI * v / views;
    const Vector3 eye(target.x() + radius_mm * std::cos(phi),
                      target.y() + radius_mm * std::sin(phi), height_mm);
    rig.push_back(look_at_camera(eye, target, fx, fy, width, height, v));
  }
  return rig;
}

}  // namespace depropose
