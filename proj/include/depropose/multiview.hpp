// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "depropose/common.hpp"
#include "depropose/deficiency.hpp"
#include "depropose/geometry.hpp"
#include "depropose/rng.hpp"
#include "depropose/skeleton.hpp"

namespace depropose {

// The V x T observation structure: per-view, per-frame 2D poses with a
// deficiency tag on every cell, plus per-view rays and (when synthetic)
// the generating 3D motion.
struct MultiViewSequence {
  std::vector<int> view_ids;
  std::vector<RayEncoding> rays;                        // per view
  std::vector<std::vector<Pose2D>> observations;        // [view][frame]
  std::vector<std::vector<DeficiencyTag>> deficiency;   // [view][frame]
  std::optional<MotionSequence> ground_truth;
  std::string action;
  double frame_rate = 50.0;

  int view_count() const { return static_cast<int>(view_ids.size()); }
  int frame_count() const {
    return observations.empty()
               ? 0
               : static_cast<int>(observations.front().size());
  }
};

inline void validate_mvs(const MultiViewSequence& mvs) {
  const auto views = mvs.view_ids.size();
  if (views == 0) throw ValidationError("multi-view sequence has no views");
  if (mvs.rays.size() != views || mvs.observations.size() != views ||
      mvs.deficiency.size() != views)
    throw ShapeMismatchError(
        "multi-view sequence: per-view container lengths disagree");
  const std::size_t frames = mvs.observations.front().size();
  if (frames == 0) throw ValidationError("multi-view sequence has no frames");
  int joints = -1;
  for (std::size_t v = 0; v < views; ++v) {
    if (mvs.observations[v].size() != frames ||
        mvs.deficiency[v].size() != frames)
      throw ShapeMismatchError("view " + std::to_string(v) +
                               " has an inconsistent frame count");
    for (const Pose2D& obs : mvs.observations[v]) {
      validate_pose2d(obs);
      if (joints == -1) joints = obs.joint_count();
      if (obs.joint_count() != joints)
        throw ShapeMismatchError("observations disagree on joint count");
    }
    for (const DeficiencyTag& tag : mvs.deficiency[v]) validate_tag(tag);
  }
  if (mvs.ground_truth &&
      mvs.ground_truth->frames.size() != frames)
    throw ShapeMismatchError(
        "ground-truth frame count does not match observations");
}

// Centre of the subject over the whole sequence; the reference point rays
// are measured toward.
inline Vector3 sequence_centroid(const MotionSequence& seq) {
  if (seq.frames.empty())
    throw ValidationError("sequence centroid of an empty sequence");
  Vector3 sum = Vector3::Zero();
  for (const Pose3D& pose : seq.frames)
    sum += pose.joints.colwise().mean().transpose();
  return sum / static_cast<double>(seq.frames.size());
}

// Projects a motion sequence into every camera and adds isotropic Gaussian
// detector noise of the given sigma (pixels) to visible joints. Noise for
// cell (v, t) comes from the stream (seed, observation, v, t), so rendering
// is order- and parallelism-independent. Visibility reflects the clean
// projection; noisy coordinates may land slightly outside the image.
inline MultiViewSequence render_observations(
    const MotionSequence& seq, const std::vector<CameraParams>& rig,
    double pixel_noise_sigma, std::uint64_t seed) {
  if (rig.empty())
    throw ValidationError("render_observations: rig must be non-empty");
  if (!(pixel_noise_sigma >= 0.0))
    throw ValidationError("render_observations: sigma must be >= 0");
  if (seq.frames.empty())
    throw ValidationError("render_observations: empty motion sequence");
  for (const CameraParams& cam : rig) validate_camera(cam);

  const Vector3 centroid = sequence_centroid(seq);
  const std::size_t views = rig.size();
  const std::size_t frames = seq.frames.size();

  MultiViewSequence mvs;
  mvs.action = seq.action_label;
  mvs.frame_rate = seq.frame_rate;
  mvs.ground_truth = seq;
  mvs.view_ids.reserve(views);
  mvs.rays.reserve(views);
  mvs.observations.assign(views, {});
  mvs.deficiency.assign(views, {});
  for (std::size_t v = 0; v < views; ++v) {
    mvs.view_ids.push_back(rig[v].view_id);
    mvs.rays.push_back(view_ray_angles(rig[v], centroid));
    mvs.observations[v].reserve(frames);
    mvs.deficiency[v].assign(frames, DeficiencyTag{});
    for (std::size_t t = 0; t < frames; ++t) {
      Pose2D obs = project(seq.frames[t], rig[v]);
      if (pixel_noise_sigma > 0.0) {
        std::mt19937_64 rng = make_rng(seed, RngStage::observation, v, t);
        std::normal_distribution<double> noise(0.0, pixel_noise_sigma);
        for (int j = 0; j < obs.joint_count(); ++j) {
          if (!obs.visibility[static_cast<std::size_t>(j)]) continue;
          obs.joints(j, 0) += noise(rng);
          obs.joints(j, 1) += noise(rng);
        }
      }
      mvs.observations[v].push_back(std::move(obs));
    }
  }
  validate_mvs(mvs);
  return mvs;
}

}  // namespace depropose
