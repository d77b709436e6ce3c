// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "depropose/common.hpp"
#include "depropose/geometry.hpp"
#include "depropose/multiview.hpp"
#include "depropose/parallel.hpp"

namespace depropose {

// --------------------------------------------------------------------------
// Features and reductions
// --------------------------------------------------------------------------

// How |A - B| collapses to a scalar. mean_abs averages absolute differences
// over every coordinate; mean_l2 averages per-row (per-joint) Euclidean
// norms. On flat vectors the two coincide.
enum class Reduction { mean_abs, mean_l2 };

inline const char* to_string(Reduction r) {
  switch (r) {
    case Reduction::mean_abs: return "mean_abs";
    case Reduction::mean_l2: return "mean_l2";
  }
  throw ValidationError("unrepresentable reduction");
}

inline Reduction parse_reduction(const std::string& name) {
  if (name == "mean_abs") return Reduction::mean_abs;
  if (name == "mean_l2") return Reduction::mean_l2;
  throw ValidationError("unknown reduction '" + name +
                        "' (expected mean_abs or mean_l2)");
}

// One view's contribution to fusion: either a 3D pose candidate or an
// opaque feature vector. All payloads within one fusion call must share
// kind and shape.
struct ViewFeature {
  int view_id = 0;
  std::variant<Pose3D, Eigen::VectorXd> payload;

  bool is_pose() const { return payload.index() == 0; }
  const Pose3D& pose() const { return std::get<Pose3D>(payload); }
  const Eigen::VectorXd& vec() const {
    return std::get<Eigen::VectorXd>(payload);
  }

  static ViewFeature from_pose(int view_id, Pose3D pose) {
    return ViewFeature{view_id, std::move(pose)};
  }
  static ViewFeature from_vector(int view_id, Eigen::VectorXd v) {
    return ViewFeature{view_id, std::move(v)};
  }
};

namespace detail {

inline double reduce_rows(const Eigen::MatrixXd& diff, Reduction r) {
  switch (r) {
    case Reduction::mean_abs: return diff.cwiseAbs().mean();
    case Reduction::mean_l2: return diff.rowwise().norm().mean();
  }
  throw ValidationError("unrepresentable reduction");
}

// Elementwise |a - b| reduced to a scalar; shapes (and payload kinds) must
// match. Vector payloads reduce as a one-column row-per-entry matrix, so
// mean_abs and mean_l2 agree on them.
inline double feature_distance(const ViewFeature& a, const ViewFeature& b,
                               Reduction r) {
  if (a.is_pose() != b.is_pose())
    throw ShapeMismatchError(
        "feature distance: payload kinds differ (pose vs vector)");
  if (a.is_pose()) {
    if (a.pose().joint_count() != b.pose().joint_count())
      throw ShapeMismatchError("feature distance: joint counts differ (" +
                               std::to_string(a.pose().joint_count()) +
                               " vs " +
                               std::to_string(b.pose().joint_count()) + ")");
    return reduce_rows(a.pose().joints - b.pose().joints, r);
  }
  if (a.vec().size() != b.vec().size())
    throw ShapeMismatchError("feature distance: vector lengths differ (" +
                             std::to_string(a.vec().size()) + " vs " +
                             std::to_string(b.vec().size()) + ")");
  return reduce_rows(a.vec() - b.vec(), r);
}

}  // namespace detail

// --------------------------------------------------------------------------
// Error terms
// --------------------------------------------------------------------------

// e_proj: reduction over mutually visible joints of the difference between
// the candidate's projection into `cam` and the observed 2D pose. Joints
// invisible on either side are excluded; none left raises NoOverlapError.
inline double projection_error(const Pose3D& candidate,
                               const CameraParams& cam, const Pose2D& observed,
                               Reduction reduction = Reduction::mean_abs) {
  validate_pose2d(observed);
  if (candidate.joint_count() != observed.joint_count())
    throw ShapeMismatchError("projection_error: candidate has " +
                             std::to_string(candidate.joint_count()) +
                             " joints, observation has " +
                             std::to_string(observed.joint_count()));
  const Pose2D projected = project(candidate, cam);
  std::vector<int> mutual;
  for (int j = 0; j < observed.joint_count(); ++j) {
    if (observed.visibility[static_cast<std::size_t>(j)] &&
        projected.visibility[static_cast<std::size_t>(j)])
      mutual.push_back(j);
  }
  if (mutual.empty())
    throw NoOverlapError(
        "projection_error: no mutually visible joints between candidate and "
        "observation");
  Eigen::MatrixXd diff(static_cast<Eigen::Index>(mutual.size()), 2);
  for (std::size_t i = 0; i < mutual.size(); ++i)
    diff.row(static_cast<Eigen::Index>(i)) =
        projected.joints.row(mutual[i]) - observed.joints.row(mutual[i]);
  return detail::reduce_rows(diff, reduction);
}

// e_abs: direct feature-space discrepancy against a reference feature.
inline double absolute_error(const ViewFeature& f_v, const ViewFeature& f_ref,
                             Reduction reduction = Reduction::mean_abs) {
  return detail::feature_distance(f_v, f_ref, reduction);
}

// E_mid,k: discrepancy of an intermediate pipeline stage's feature.
inline double intermediate_error(const ViewFeature& stage,
                                 const ViewFeature& reference,
                                 Reduction reduction = Reduction::mean_abs) {
  return detail::feature_distance(stage, reference, reduction);
}

// E_total = E_proj + E_abs + E_mid.
inline double total_error(double e_proj, double e_abs, double e_mid) {
  if (!(e_proj >= 0.0) || !(e_abs >= 0.0) || !(e_mid >= 0.0))
    throw ValidationError("total_error: error terms must be non-negative");
  return e_proj + e_abs + e_mid;
}

// Per-view error bookkeeping for one fused estimate.
struct ErrorBreakdown {
  std::vector<double> e_proj;  // per view
  std::vector<double> e_abs;   // per view
  std::vector<double> e_mid;   // per optional pipeline stage
  double epsilon = 1e-6;
};

// --------------------------------------------------------------------------
// Weights and fusion
// --------------------------------------------------------------------------

struct FusionWeights {
  std::vector<double> omega;  // per view, >= 0
  bool normalized = false;    // true => sums to 1
};

// omega_v = 1 / (e_proj_v + e_abs_v + epsilon), optionally normalized to
// sum 1 (the default; the raw sum is kept for literal comparison runs).
inline FusionWeights fusion_weights(std::span<const double> e_proj,
                                    std::span<const double> e_abs,
                                    double epsilon = 1e-6,
                                    bool normalize = true) {
  if (e_proj.size() != e_abs.size())
    throw ShapeMismatchError("fusion_weights: e_proj has " +
                             std::to_string(e_proj.size()) +
                             " entries, e_abs has " +
                             std::to_string(e_abs.size()));
  if (e_proj.empty()) throw ValidationError("fusion_weights: no views");
  if (!(epsilon > 0.0))
    throw RangeError("fusion_weights: epsilon must be > 0");
  FusionWeights w;
  w.omega.reserve(e_proj.size());
  for (std::size_t v = 0; v < e_proj.size(); ++v) {
    if (!(e_proj[v] >= 0.0) || !std::isfinite(e_proj[v]) ||
        !(e_abs[v] >= 0.0) || !std::isfinite(e_abs[v]))
      throw ValidationError(
          "fusion_weights: errors must be finite and non-negative");
    w.omega.push_back(1.0 / (e_proj[v] + e_abs[v] + epsilon));
  }
  if (normalize) {
    double sum = 0.0;
    for (const double x : w.omega) sum += x;
    for (double& x : w.omega) x /= sum;
    w.normalized = true;
  }
  return w;
}

// F = sum_v omega_v * f_v. Normalized weights are required unless the
// caller explicitly opts into the raw (unnormalized) paper form.
inline ViewFeature fuse(const std::vector<ViewFeature>& features,
                        const FusionWeights& weights, bool allow_raw = false) {
  if (features.empty()) throw ValidationError("fuse: no features");
  if (weights.omega.size() != features.size())
    throw ShapeMismatchError("fuse: " + std::to_string(weights.omega.size()) +
                             " weights for " +
                             std::to_string(features.size()) + " features");
  if (!weights.normalized && !allow_raw)
    throw ValidationError(
        "fuse: weights are not normalized; pass allow_raw to use the raw "
        "fusion sum");
  double sum = 0.0;
  for (const double w : weights.omega) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ValidationError("fuse: weights must be finite and non-negative");
    sum += w;
  }
  if (weights.normalized && std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("fuse: weights claim normalization but sum to " +
                          std::to_string(sum));

  ViewFeature out = features.front();
  out.view_id = -1;  // fused
  if (features.front().is_pose()) {
    const int joints = features.front().pose().joint_count();
    Pose3D acc = Pose3D::zeros(joints);
    for (std::size_t v = 0; v < features.size(); ++v) {
      if (!features[v].is_pose() ||
          features[v].pose().joint_count() != joints)
        throw ShapeMismatchError("fuse: feature shapes disagree");
      acc.joints += weights.omega[v] * features[v].pose().joints;
    }
    out.payload = std::move(acc);
  } else {
    const Eigen::Index dim = features.front().vec().size();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
    for (std::size_t v = 0; v < features.size(); ++v) {
      if (features[v].is_pose() || features[v].vec().size() != dim)
        throw ShapeMismatchError("fuse: feature shapes disagree");
      acc += weights.omega[v] * features[v].vec();
    }
    out.payload = std::move(acc);
  }
  return out;
}

// --------------------------------------------------------------------------
// Adaptive multi-view estimation
// --------------------------------------------------------------------------

// training: e_abs measured against attached ground truth (the reference
// feature f_3D). inference: ground truth is unavailable, e_abs = 0 and
// weights ride on reprojection error alone.
enum class EstimateMode { training, inference };

inline const char* to_string(EstimateMode m) {
  return m == EstimateMode::training ? "training" : "inference";
}
inline EstimateMode parse_estimate_mode(const std::string& name) {
  if (name == "training") return EstimateMode::training;
  if (name == "inference") return EstimateMode::inference;
  throw ValidationError("unknown estimate mode '" + name +
                        "' (expected training or inference)");
}

// How per-view candidates are produced:
//   triangulation_pairs — joint-wise average of all two-view DLT solutions
//     involving the view (well-conditioned pairs only);
//   lifting — back-project each observed pixel to the view's ray at the
//     anchor's distance from the camera (single-view baseline).
enum class CandidateScheme { triangulation_pairs, lifting };

inline const char* to_string(CandidateScheme s) {
  return s == CandidateScheme::triangulation_pairs ? "triangulation_pairs"
                                                   : "lifting";
}
inline CandidateScheme parse_candidate_scheme(const std::string& name) {
  if (name == "triangulation_pairs")
    return CandidateScheme::triangulation_pairs;
  if (name == "lifting") return CandidateScheme::lifting;
  throw ValidationError("unknown candidate scheme '" + name +
                        "' (expected triangulation_pairs or lifting)");
}

// adaptive — inverse-error weights; uniform — equal weights over usable
// views; raw — unnormalized inverse-error weights (paper's literal sum);
// none — first usable view's candidate passes through.
enum class FusionMode { adaptive, uniform, raw, none };

inline const char* to_string(FusionMode m) {
  switch (m) {
    case FusionMode::adaptive: return "adaptive";
    case FusionMode::uniform: return "uniform";
    case FusionMode::raw: return "raw";
    case FusionMode::none: return "none";
  }
  throw ValidationError("unrepresentable fusion mode");
}
inline FusionMode parse_fusion_mode(const std::string& name) {
  if (name == "adaptive") return FusionMode::adaptive;
  if (name == "uniform") return FusionMode::uniform;
  if (name == "raw") return FusionMode::raw;
  if (name == "none") return FusionMode::none;
  throw ValidationError("unknown fusion mode '" + name +
                        "' (expected adaptive, uniform, raw, or none)");
}

struct AdaptiveOptions {
  EstimateMode mode = EstimateMode::training;
  CandidateScheme scheme = CandidateScheme::triangulation_pairs;
  FusionMode fusion = FusionMode::adaptive;
  Reduction reduction = Reduction::mean_abs;
  double epsilon = 1e-6;
  // Fallback/lifting reference point (the rig's aim point). Joints no view
  // pair can resolve fall back to the view's own resolved centroid, then to
  // this anchor — never to other views' data.
  Vector3 scene_anchor = Vector3(0.0, 0.0, 1000.0);
  // In training mode, use the ground-truth root joint as anchor instead.
  bool anchor_from_ground_truth = false;
};

struct FrameEstimate {
  Pose3D pose;                   // fused estimate
  FusionWeights weights;         // per view; 0 marks views unusable here
  ErrorBreakdown errors;         // per-view e_proj / e_abs, stage e_mid
  std::vector<Pose3D> candidates;  // per-view candidates entering fusion
};

namespace detail {

// Weighted-average candidate for one view from all two-view DLT pairs that
// contain it. Ill-conditioned pairs (near-parallel or duplicated rays) are
// treated as unresolved rather than polluting the average.
inline Pose3D pairs_candidate(const MultiViewSequence& mvs,
                              const std::vector<CameraParams>& cameras,
                              const std::vector<Matrix34>& projections,
                              std::size_t v, std::size_t t,
                              const Vector3& anchor) {
  const Pose2D& own = mvs.observations[v][t];
  const int joints = own.joint_count();
  Pose3D candidate = Pose3D::zeros(joints);
  std::vector<int> hits(static_cast<std::size_t>(joints), 0);
  std::array<Matrix34, 2> pair_p;
  std::array<Eigen::Vector2d, 2> pair_px;
  for (std::size_t w = 0; w < cameras.size(); ++w) {
    if (w == v) continue;
    const Pose2D& other = mvs.observations[w][t];
    for (int j = 0; j < joints; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (!own.visibility[ju] || !other.visibility[ju]) continue;
      pair_p[0] = projections[v];
      pair_p[1] = projections[w];
      pair_px[0] = Eigen::Vector2d(own.joints(j, 0), own.joints(j, 1));
      pair_px[1] = Eigen::Vector2d(other.joints(j, 0), other.joints(j, 1));
      double condition = 0.0;
      const Vector3 x = dlt_point(pair_p, pair_px, {}, &condition);
      if (!(condition <= kIllConditionedThreshold) || !x.allFinite())
        continue;
      candidate.joints.row(j) += x.transpose();
      hits[ju] += 1;
    }
  }
  Vector3 resolved_centroid = Vector3::Zero();
  int resolved = 0;
  for (int j = 0; j < joints; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (hits[ju] == 0) continue;
    candidate.joints.row(j) /= static_cast<double>(hits[ju]);
    resolved_centroid += candidate.joints.row(j).transpose();
    ++resolved;
  }
  const Vector3 fallback =
      resolved > 0 ? Vector3(resolved_centroid / resolved) : anchor;
  for (int j = 0; j < joints; ++j)
    if (hits[static_cast<std::size_t>(j)] == 0)
      candidate.joints.row(j) = fallback.transpose();
  return candidate;
}

// Single-view candidate: each visible pixel back-projected along its ray to
// the anchor's distance from the camera.
inline Pose3D lifting_candidate(const MultiViewSequence& mvs,
                                const CameraParams& cam, std::size_t v,
                                std::size_t t, const Vector3& anchor) {
  const Pose2D& own = mvs.observations[v][t];
  const int joints = own.joint_count();
  const Vector3 center = cam.center();
  const double depth = (anchor - center).norm();
  Pose3D candidate = Pose3D::zeros(joints);
  Vector3 resolved_centroid = Vector3::Zero();
  int resolved = 0;
  std::vector<char> lifted(static_cast<std::size_t>(joints), 0);
  for (int j = 0; j < joints; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (!own.visibility[ju]) continue;
    const Vector3 cam_ray((own.joints(j, 0) - cam.cx) / cam.fx,
                          (own.joints(j, 1) - cam.cy) / cam.fy, 1.0);
    const Vector3 dir = (cam.rotation.transpose() * cam_ray).normalized();
    candidate.joints.row(j) = (center + depth * dir).transpose();
    resolved_centroid += candidate.joints.row(j).transpose();
    lifted[ju] = 1;
    ++resolved;
  }
  const Vector3 fallback =
      resolved > 0 ? Vector3(resolved_centroid / resolved) : anchor;
  for (int j = 0; j < joints; ++j)
    if (!lifted[static_cast<std::size_t>(j)])
      candidate.joints.row(j) = fallback.transpose();
  return candidate;
}

}  // namespace detail

// One frame of the adaptive pipeline: per-view candidates, error terms,
// weights, fused pose. Views whose error terms are undefined (no visible
// joints) are excluded with weight 0; a frame with no usable view at all is
// an error.
inline FrameEstimate estimate_frame(const MultiViewSequence& mvs,
                                    const std::vector<CameraParams>& cameras,
                                    std::size_t t,
                                    const AdaptiveOptions& opt) {
  const std::size_t views = cameras.size();
  std::vector<Matrix34> projections;
  projections.reserve(views);
  for (const CameraParams& cam : cameras)
    projections.push_back(cam.projection_matrix());

  const bool use_gt =
      opt.mode == EstimateMode::training && mvs.ground_truth.has_value();
  const Vector3 anchor =
      opt.anchor_from_ground_truth && use_gt
          ? Vector3(mvs.ground_truth->frames[t].joints.row(0).transpose())
          : opt.scene_anchor;

  FrameEstimate frame;
  frame.errors.epsilon = opt.epsilon;
  frame.errors.e_proj.assign(views, 0.0);
  frame.errors.e_abs.assign(views, 0.0);
  frame.candidates.reserve(views);
  std::vector<char> usable(views, 1);

  ViewFeature gt_feature;
  if (use_gt)
    gt_feature = ViewFeature::from_pose(-1, mvs.ground_truth->frames[t]);

  for (std::size_t v = 0; v < views; ++v) {
    Pose3D candidate =
        opt.scheme == CandidateScheme::triangulation_pairs
            ? detail::pairs_candidate(mvs, cameras, projections, v, t, anchor)
            : detail::lifting_candidate(mvs, cameras[v], v, t, anchor);
    try {
      frame.errors.e_proj[v] = projection_error(
          candidate, cameras[v], mvs.observations[v][t], opt.reduction);
    } catch (const NoOverlapError&) {
      usable[v] = 0;  // view contributes nothing this frame
    }
    if (usable[v] && use_gt)
      frame.errors.e_abs[v] = detail::feature_distance(
          ViewFeature::from_pose(static_cast<int>(v), candidate), gt_feature,
          opt.reduction);
    frame.candidates.push_back(std::move(candidate));
  }

  std::size_t usable_count = 0;
  for (const char u : usable) usable_count += static_cast<std::size_t>(u);
  if (usable_count == 0)
    throw Error("estimate_frame: no usable views in frame " +
                std::to_string(t));

  // Weights per fusion mode, zeros on unusable views.
  FusionWeights weights;
  weights.omega.assign(views, 0.0);
  switch (opt.fusion) {
    case FusionMode::adaptive:
    case FusionMode::raw: {
      double sum = 0.0;
      for (std::size_t v = 0; v < views; ++v) {
        if (!usable[v]) continue;
        weights.omega[v] = 1.0 / (frame.errors.e_proj[v] +
                                  frame.errors.e_abs[v] + opt.epsilon);
        sum += weights.omega[v];
      }
      if (opt.fusion == FusionMode::adaptive) {
        for (double& w : weights.omega) w /= sum;
        weights.normalized = true;
      }
      break;
    }
    case FusionMode::uniform: {
      for (std::size_t v = 0; v < views; ++v)
        if (usable[v])
          weights.omega[v] = 1.0 / static_cast<double>(usable_count);
      weights.normalized = true;
      break;
    }
    case FusionMode::none: {
      for (std::size_t v = 0; v < views; ++v) {
        if (usable[v]) {
          weights.omega[v] = 1.0;
          break;
        }
      }
      weights.normalized = true;
      break;
    }
  }

  std::vector<ViewFeature> features;
  features.reserve(views);
  for (std::size_t v = 0; v < views; ++v)
    features.push_back(
        ViewFeature::from_pose(static_cast<int>(v), frame.candidates[v]));
  frame.pose =
      fuse(features, weights, /*allow_raw=*/opt.fusion == FusionMode::raw)
          .pose();
  frame.weights = std::move(weights);

  // Intermediate stage: the unweighted candidate mean before fusion.
  if (use_gt) {
    FusionWeights uniform;
    uniform.omega.assign(views, 0.0);
    for (std::size_t v = 0; v < views; ++v)
      if (usable[v])
        uniform.omega[v] = 1.0 / static_cast<double>(usable_count);
    uniform.normalized = true;
    const ViewFeature stage = fuse(features, uniform);
    frame.errors.e_mid.push_back(
        detail::feature_distance(stage, gt_feature, opt.reduction));
  }
  return frame;
}

// Runs estimate_frame over every frame (frames are independent; the loop
// parallelizes with slot writes, so results are identical at any worker
// count). Requires at least two views.
inline std::vector<FrameEstimate> adaptive_estimate(
    const MultiViewSequence& mvs, const std::vector<CameraParams>& cameras,
    const AdaptiveOptions& opt = {}) {
  validate_mvs(mvs);
  if (mvs.view_count() < 2)
    throw ValidationError("adaptive_estimate: need at least two views");
  if (cameras.size() != static_cast<std::size_t>(mvs.view_count()))
    throw ShapeMismatchError(
        "adaptive_estimate: camera count does not match view count");
  for (const CameraParams& cam : cameras) validate_camera(cam);
  if (!(opt.epsilon > 0.0))
    throw RangeError("adaptive_estimate: epsilon must be > 0");

  const std::size_t frames = static_cast<std::size_t>(mvs.frame_count());
  std::vector<FrameEstimate> estimates(frames);
  parallel_for(frames, [&](std::size_t t) {
    estimates[t] = estimate_frame(mvs, cameras, t, opt);
  });
  return estimates;
}

}  // namespace depropose
