// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Geometry>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "depropose/common.hpp"
#include "depropose/geometry.hpp"
#include "depropose/image.hpp"
#include "depropose/rng.hpp"

namespace depropose {

// --------------------------------------------------------------------------
// Skeleton model
// --------------------------------------------------------------------------

// Kinematic tree. parent[0] == 0 marks the root; bone j (j >= 1) connects
// parent[j] -> j with length bone_lengths[j] along rest_directions[j] in the
// neutral pose. Index 0 of bone_lengths / rest_directions is unused.
struct SkeletonModel {
  std::vector<int> parent;
  std::vector<double> bone_lengths;       // mm
  std::vector<Vector3> rest_directions;   // unit, parent -> joint
  std::vector<std::string> joint_names;
  Vector3 rest_root = Vector3(0.0, 0.0, 1000.0);  // root position, mm

  int joint_count() const { return static_cast<int>(parent.size()); }

  static SkeletonModel human17(double scale = 1.0);
  static SkeletonModel chain(int joints, double segment_mm = 250.0);
};

inline void validate_skeleton(const SkeletonModel& model) {
  const int j_count = model.joint_count();
  if (j_count < 1) throw ValidationError("skeleton: need at least one joint");
  if (model.bone_lengths.size() != static_cast<std::size_t>(j_count) ||
      model.rest_directions.size() != static_cast<std::size_t>(j_count) ||
      model.joint_names.size() != static_cast<std::size_t>(j_count))
    throw ShapeMismatchError("skeleton: field lengths disagree");
  if (model.parent[0] != 0)
    throw ValidationError("skeleton: joint 0 must be the root");
  for (int j = 1; j < j_count; ++j) {
    if (model.parent[static_cast<std::size_t>(j)] < 0 ||
        model.parent[static_cast<std::size_t>(j)] >= j_count ||
        model.parent[static_cast<std::size_t>(j)] == j)
      throw ValidationError("skeleton: joint " + std::to_string(j) +
                            " has an invalid parent");
    if (!(model.bone_lengths[static_cast<std::size_t>(j)] > 0.0))
      throw ValidationError("skeleton: bone " + std::to_string(j) +
                            " must have positive length");
    if (std::abs(model.rest_directions[static_cast<std::size_t>(j)].norm() -
                 1.0) > 1e-9)
      throw ValidationError("skeleton: rest direction " + std::to_string(j) +
                            " is not unit length");
    // Walk to the root; a cycle would loop more than j_count steps.
    int cursor = j;
    for (int steps = 0; cursor != 0; ++steps) {
      if (steps > j_count)
        throw ValidationError("skeleton: parent array contains a cycle");
      cursor = model.parent[static_cast<std::size_t>(cursor)];
    }
  }
}

inline SkeletonModel SkeletonModel::human17(double scale) {
  if (!(scale > 0.0))
    throw ValidationError("human17: scale must be positive");
  // Human3.6M-style topology. The subject faces +X; +Y is its left, +Z up.
  SkeletonModel m;
  m.parent = {0, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15};
  m.joint_names = {"pelvis",        "right_hip",   "right_knee",
                   "right_ankle",   "left_hip",    "left_knee",
                   "left_ankle",    "spine",       "thorax",
                   "neck",          "head",        "left_shoulder",
                   "left_elbow",    "left_wrist",  "right_shoulder",
                   "right_elbow",   "right_wrist"};
  const double s = scale;
  m.bone_lengths = {0.0,       130.0 * s, 450.0 * s, 440.0 * s, 130.0 * s,
                    450.0 * s, 440.0 * s, 230.0 * s, 230.0 * s, 110.0 * s,
                    120.0 * s, 180.0 * s, 280.0 * s, 250.0 * s, 180.0 * s,
                    280.0 * s, 250.0 * s};
  const Vector3 up(0.0, 0.0, 1.0);
  const Vector3 down(0.0, 0.0, -1.0);
  const Vector3 left(0.0, 1.0, 0.0);
  const Vector3 right(0.0, -1.0, 0.0);
  m.rest_directions = {Vector3::Zero(),  // root, unused
                       right, down, down,   // right leg
                       left,  down, down,   // left leg
                       up,    up,   up, up,  // spine .. head
                       left,  down, down,   // left arm
                       right, down, down};  // right arm
  m.rest_root = Vector3(0.0, 0.0, 1000.0 * s);
  validate_skeleton(m);
  return m;
}

inline SkeletonModel SkeletonModel::chain(int joints, double segment_mm) {
  if (joints < 1) throw ValidationError("chain: need at least one joint");
  if (!(segment_mm > 0.0))
    throw ValidationError("chain: segment length must be positive");
  SkeletonModel m;
  m.parent.resize(static_cast<std::size_t>(joints));
  m.bone_lengths.assign(static_cast<std::size_t>(joints), segment_mm);
  m.bone_lengths[0] = 0.0;
  m.rest_directions.assign(static_cast<std::size_t>(joints),
                           Vector3::Zero());
  m.joint_names.resize(static_cast<std::size_t>(joints));
  m.parent[0] = 0;
  m.joint_names[0] = "joint_0";
  // Helical rest layout: keeps any 3+ joints non-collinear, which matters
  // for Procrustes alignment of static poses.
  constexpr double kTurn = 2.39996322972865332;  // golden angle, radians
  for (int j = 1; j < joints; ++j) {
    m.parent[static_cast<std::size_t>(j)] = j - 1;
    m.joint_names[static_cast<std::size_t>(j)] = "joint_" + std::to_string(j);
    m.rest_directions[static_cast<std::size_t>(j)] =
        Vector3(0.55 * std::cos(kTurn * j), 0.55 * std::sin(kTurn * j), -0.85)
            .normalized();
  }
  m.rest_root = Vector3(0.0, 0.0, 400.0 + 220.0 * joints);
  validate_skeleton(m);
  return m;
}

// Neutral pose: forward kinematics of the rest directions.
inline Pose3D rest_pose(const SkeletonModel& model) {
  validate_skeleton(model);
  const int j_count = model.joint_count();
  Pose3D pose;
  pose.joints.resize(j_count, 3);
  pose.joints.row(0) = model.rest_root.transpose();
  // validate_skeleton guarantees ancestors terminate at 0; process joints
  // repeatedly until every parent has been placed (supports any ordering).
  std::vector<char> placed(static_cast<std::size_t>(j_count), 0);
  placed[0] = 1;
  int remaining = j_count - 1;
  while (remaining > 0) {
    for (int j = 1; j < j_count; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (placed[ju] || !placed[static_cast<std::size_t>(model.parent[ju])])
        continue;
      pose.joints.row(j) =
          pose.joints.row(model.parent[ju]) +
          (model.bone_lengths[ju] * model.rest_directions[ju]).transpose();
      placed[ju] = 1;
      --remaining;
    }
  }
  return pose;
}

// --------------------------------------------------------------------------
// Motion generation
// --------------------------------------------------------------------------

struct MotionSequence {
  std::vector<Pose3D> frames;
  double frame_rate = 50.0;  // Hz
  std::string action_label;

  int frame_count() const { return static_cast<int>(frames.size()); }
};

// Checks the bone-length conservation invariant (< 1e-6 mm drift per bone).
inline void validate_motion(const MotionSequence& seq,
                            const SkeletonModel& model) {
  validate_skeleton(model);
  if (seq.frames.empty())
    throw ValidationError("motion sequence must have at least one frame");
  for (const Pose3D& pose : seq.frames) {
    if (pose.joint_count() != model.joint_count())
      throw ShapeMismatchError("motion frame joint count differs from model");
    for (int j = 1; j < model.joint_count(); ++j) {
      const double len =
          (pose.joints.row(j) - pose.joints.row(model.parent[static_cast<std::size_t>(j)]))
              .norm();
      if (std::abs(len - model.bone_lengths[static_cast<std::size_t>(j)]) >
          1e-6)
        throw ValidationError("bone " + std::to_string(j) +
                              " drifts from its model length");
    }
  }
}

enum class ActionPreset { walk, sit, wave, idle };

inline const char* to_string(ActionPreset a) {
  switch (a) {
    case ActionPreset::walk: return "walk";
    case ActionPreset::sit: return "sit";
    case ActionPreset::wave: return "wave";
    case ActionPreset::idle: return "idle";
  }
  throw ValidationError("unrepresentable action preset");
}

inline ActionPreset parse_action(const std::string& name) {
  if (name == "walk") return ActionPreset::walk;
  if (name == "sit") return ActionPreset::sit;
  if (name == "wave") return ActionPreset::wave;
  if (name == "idle") return ActionPreset::idle;
  throw ValidationError("unknown action preset '" + name +
                        "' (expected walk, sit, wave, or idle)");
}

namespace detail {

// Documented preset constants. Joint angles follow
//   theta_j(t) = amp_rad * gain_j * jitter_j * sin(2*pi*freq_hz*t + phase_j)
// with jitter_j drawn once per joint from [0.85, 1.15]; the root follows the
// preset trajectory. All phases are zero for idle so t=0 is the rest pose.
struct PresetParams {
  double freq_hz;
  double amp_rad;
  double bob_mm;          // vertical root oscillation amplitude
  double circle_mm;       // horizontal circular drift radius (walk)
  double circle_period_s;
  double drop_mm;         // periodic root lowering (sit)
};

inline PresetParams preset_params(ActionPreset a) {
  switch (a) {
    case ActionPreset::walk: return {1.0, 0.5, 25.0, 300.0, 8.0, 0.0};
    case ActionPreset::sit: return {0.25, 0.7, 0.0, 0.0, 0.0, 300.0};
    case ActionPreset::wave: return {1.2, 0.9, 5.0, 0.0, 0.0, 0.0};
    case ActionPreset::idle: return {0.4, 0.06, 10.0, 0.0, 0.0, 0.0};
  }
  throw ValidationError("unrepresentable action preset");
}

inline double joint_gain(ActionPreset a, int j, int j_count) {
  if (j_count != 17) return j == 0 ? 0.0 : 1.0;
  static constexpr double kWalk[17] = {0.0, 0.3, 1.0, 0.8, 0.3, 1.0,
                                       0.8, 0.1, 0.1, 0.15, 0.15, 0.7,
                                       0.6, 0.5, 0.7, 0.6, 0.5};
  static constexpr double kSit[17] = {0.0, 0.5, 1.0, 0.6, 0.5, 1.0,
                                      0.6, 0.4, 0.3, 0.2, 0.2, 0.2,
                                      0.2, 0.2, 0.2, 0.2, 0.2};
  static constexpr double kWave[17] = {0.0, 0.05, 0.05, 0.05, 0.05, 0.05,
                                       0.05, 0.05, 0.05, 0.1, 0.1, 0.2,
                                       1.0, 1.0, 0.2, 1.0, 1.0};
  static constexpr double kIdle[17] = {0.0, 1.0, 1.0, 1.0, 1.0, 1.0,
                                       1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
                                       1.0, 1.0, 1.0, 1.0, 1.0};
  switch (a) {
    case ActionPreset::walk: return kWalk[j];
    case ActionPreset::sit: return kSit[j];
    case ActionPreset::wave: return kWave[j];
    case ActionPreset::idle: return kIdle[j];
  }
  return 0.0;
}

// A swing axis perpendicular to the bone's rest direction. Legs and arms
// (rest direction near -Z) swing in the sagittal plane.
inline Vector3 swing_axis(const Vector3& rest_dir) {
  const Vector3 probe = std::abs(rest_dir.x()) < 0.9
                            ? Vector3(1.0, 0.0, 0.0)
                            : Vector3(0.0, 0.0, 1.0);
  return rest_dir.cross(probe).normalized();
}

}  // namespace detail

// Largest |d theta / dt| any joint can reach under a preset, including the
// maximum amplitude jitter of 1.15. Tests bound frame-to-frame swings by
// this rate.
inline double max_angular_velocity(ActionPreset a) {
  const detail::PresetParams p = detail::preset_params(a);
  return p.amp_rad * 1.15 * 2.0 * M_PI * p.freq_hz;
}

// Forward-kinematic sinusoid composition. Deterministic in (model, action,
// frames, seed, frame_rate); bone lengths are preserved by construction
// because every bone keeps its length and only its direction rotates.
inline MotionSequence generate_motion(const SkeletonModel& model,
                                      ActionPreset action, int frames,
                                      std::uint64_t seed,
                                      double frame_rate = 50.0) {
  validate_skeleton(model);
  if (frames < 1) throw ValidationError("generate_motion: T must be >= 1");
  if (!(frame_rate > 0.0))
    throw ValidationError("generate_motion: frame rate must be positive");
  const int j_count = model.joint_count();
  const detail::PresetParams p = detail::preset_params(action);

  std::mt19937_64 rng =
      make_rng(seed, RngStage::motion, static_cast<std::uint64_t>(action));
  std::uniform_real_distribution<double> jitter_dist(0.85, 1.15);
  std::vector<double> jitter(static_cast<std::size_t>(j_count), 1.0);
  std::vector<double> phase(static_cast<std::size_t>(j_count), 0.0);
  std::vector<Vector3> axis(static_cast<std::size_t>(j_count),
                            Vector3::UnitX());
  for (int j = 1; j < j_count; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    jitter[ju] = jitter_dist(rng);
    // Alternating half-cycle phases (anti-phase limbs); idle keeps all
    // phases at zero so its first frame is exactly the rest pose.
    phase[ju] = action == ActionPreset::idle ? 0.0 : M_PI * (j % 2);
    axis[ju] = detail::swing_axis(model.rest_directions[ju]);
  }

  // Joint processing order with parents first.
  std::vector<int> order;
  {
    std::vector<char> placed(static_cast<std::size_t>(j_count), 0);
    placed[0] = 1;
    int remaining = j_count - 1;
    while (remaining > 0) {
      for (int j = 1; j < j_count; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (placed[ju] || !placed[static_cast<std::size_t>(model.parent[ju])])
          continue;
        order.push_back(j);
        placed[ju] = 1;
        --remaining;
      }
    }
  }

  MotionSequence seq;
  seq.frame_rate = frame_rate;
  seq.action_label = to_string(action);
  seq.frames.reserve(static_cast<std::size_t>(frames));
  const double omega = 2.0 * M_PI * p.freq_hz;
  for (int t = 0; t < frames; ++t) {
    const double tsec = t / frame_rate;
    Pose3D pose;
    pose.joints.resize(j_count, 3);
    Vector3 root = model.rest_root;
    if (p.circle_mm > 0.0) {
      const double w = 2.0 * M_PI / p.circle_period_s;
      root.x() += p.circle_mm * std::sin(w * tsec);
      root.y() += p.circle_mm * (1.0 - std::cos(w * tsec));
    }
    root.z() += p.bob_mm * std::sin(2.0 * omega * tsec);
    root.z() -= p.drop_mm * 0.5 * (1.0 - std::cos(omega * tsec));
    pose.joints.row(0) = root.transpose();
    for (const int j : order) {
      const auto ju = static_cast<std::size_t>(j);
      const double theta = p.amp_rad *
                           detail::joint_gain(action, j, j_count) *
                           jitter[ju] * std::sin(omega * tsec + phase[ju]);
      const Vector3 dir =
          Eigen::AngleAxisd(theta, axis[ju]) * model.rest_directions[ju];
      pose.joints.row(j) =
          pose.joints.row(model.parent[ju]) +
          (model.bone_lengths[ju] * dir).transpose();
    }
    seq.frames.push_back(std::move(pose));
  }
  return seq;
}

// --------------------------------------------------------------------------
// Stick-figure rasterisation
// --------------------------------------------------------------------------

namespace detail {

// Classic integer Bresenham line; every pixel is bounds-checked so segments
// may leave the canvas freely.
inline void draw_line(PixelGrid& g, int x0, int y0, int x1, int y1,
                      std::uint8_t value) {
  int dx = std::abs(x1 - x0);
  const int sx = x0 < x1 ? 1 : -1;
  int dy = -std::abs(y1 - y0);
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    if (g.in_bounds(x0, y0))
      for (int c = 0; c < g.channels; ++c) g.at(x0, y0, c) = value;
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace detail

// White canvas with 1-pixel black bone segments. A bone is drawn only when
// both of its joints are visible; endpoints are rounded to the nearest
// pixel (ties away from zero) and the segment is clipped per pixel.
inline PixelGrid rasterize_view(const Pose2D& obs, const SkeletonModel& model,
                                int width, int height) {
  validate_skeleton(model);
  validate_pose2d(obs);
  if (obs.joint_count() != model.joint_count())
    throw ShapeMismatchError("rasterize_view: observation has " +
                             std::to_string(obs.joint_count()) +
                             " joints, model has " +
                             std::to_string(model.joint_count()));
  PixelGrid g = PixelGrid::filled(width, height, 1, 255);
  for (int j = 1; j < model.joint_count(); ++j) {
    const int parent = model.parent[static_cast<std::size_t>(j)];
    if (!obs.visibility[static_cast<std::size_t>(j)] ||
        !obs.visibility[static_cast<std::size_t>(parent)])
      continue;
    detail::draw_line(
        g, static_cast<int>(std::llround(obs.joints(parent, 0))),
        static_cast<int>(std::llround(obs.joints(parent, 1))),
        static_cast<int>(std::llround(obs.joints(j, 0))),
        static_cast<int>(std::llround(obs.joints(j, 1))), 0);
  }
  return g;
}

}  // namespace depropose
