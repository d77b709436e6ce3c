// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "depropose/common.hpp"
#include "depropose/deficiency.hpp"
#include "depropose/image.hpp"
#include "depropose/multiview.hpp"
#include "depropose/rng.hpp"

namespace depropose {

// Occlusion-degree ceiling: requests above this are rejected.
inline constexpr double kMaxOcclusionDegree = 0.7;
// Placement loop stops within this band around the target degree.
inline constexpr double kOcclusionTolerance = 0.02;
// Placement attempts (accepted or rejected) before giving up best-effort.
inline constexpr int kOcclusionAttemptCap = 1000;
// Paint value for occluder pixels: constant mid-gray.
inline constexpr std::uint8_t kOccluderFill = 128;

namespace detail {

// Half-away-from-zero rounding then clamping to the 8-bit range; the range
// handling all additive/multiplicative noise shares.
inline std::uint8_t to_byte(double value) {
  const long long rounded = std::llround(value);
  return static_cast<std::uint8_t>(std::clamp<long long>(rounded, 0, 255));
}

}  // namespace detail

// --------------------------------------------------------------------------
// Pixel-level corruption
// --------------------------------------------------------------------------

// I' = clamp(round(I + N(0, sigma^2)), 0, 255), one draw per pixel per
// channel. sigma is in 8-bit intensity units. sigma == 0 returns the input
// bit-identically (no draws are consumed).
inline PixelGrid gaussian_noise(const PixelGrid& img, double sigma,
                                std::uint64_t seed) {
  validate_grid(img);
  if (!(sigma >= 0.0))
    throw ValidationError("gaussian_noise: sigma must be >= 0");
  PixelGrid out = img;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng = make_rng(seed, RngStage::image_noise, 1);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& px : out.data)
    px = detail::to_byte(static_cast<double>(px) + noise(rng));
  return out;
}

// Paper's three-case rule, per pixel: probability p/2 -> 0 (pepper),
// p/2 -> 255 (salt), otherwise unchanged. A hit flips every channel of the
// pixel together.
inline PixelGrid salt_pepper(const PixelGrid& img, double density,
                             std::uint64_t seed) {
  validate_grid(img);
  if (!(density >= 0.0) || !(density <= 1.0))
    throw RangeError("salt_pepper: density must lie in [0, 1]");
  PixelGrid out = img;
  if (density == 0.0) return out;
  std::mt19937_64 rng = make_rng(seed, RngStage::image_noise, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t px = 0; px < out.pixel_count(); ++px) {
    const double draw = u(rng);
    if (draw >= density) continue;
    const std::uint8_t value = draw < density / 2.0 ? 0 : 255;
    for (int c = 0; c < out.channels; ++c)
      out.data[px * static_cast<std::size_t>(out.channels) +
               static_cast<std::size_t>(c)] = value;
  }
  return out;
}

// I' = clamp(round(I * (1 + N(0, sigma^2))), 0, 255), one draw per pixel
// per channel; sigma is dimensionless per the multiplicative form.
inline PixelGrid speckle(const PixelGrid& img, double sigma,
                         std::uint64_t seed) {
  validate_grid(img);
  if (!(sigma >= 0.0)) throw ValidationError("speckle: sigma must be >= 0");
  PixelGrid out = img;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng = make_rng(seed, RngStage::image_noise, 3);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& px : out.data)
    px = detail::to_byte(static_cast<double>(px) * (1.0 + noise(rng)));
  return out;
}

struct MissingBlocksResult {
  PixelGrid image;
  BoolGrid mask;  // exactly the blacked-out pixels
};

// Drops `block_count` axis-aligned rectangles to black. Side lengths are
// uniform in [min, max]; positions uniform over placements fully inside the
// image; overlap permitted. Pixels outside every block are untouched.
inline MissingBlocksResult missing_blocks(const PixelGrid& img,
                                          int block_count,
                                          std::pair<int, int> size_range,
                                          std::uint64_t seed) {
  validate_grid(img);
  if (block_count < 0)
    throw ValidationError("missing_blocks: block count must be >= 0");
  const auto [min_side, max_side] = size_range;
  if (min_side < 1 || max_side < min_side ||
      max_side > std::min(img.width, img.height))
    throw RangeError("missing_blocks: invalid size range [" +
                     std::to_string(min_side) + ", " +
                     std::to_string(max_side) + "] for a " +
                     std::to_string(img.width) + "x" +
                     std::to_string(img.height) + " image");
  MissingBlocksResult result{img, BoolGrid::filled(img.width, img.height,
                                                   false)};
  if (block_count == 0) return result;
  std::mt19937_64 rng = make_rng(seed, RngStage::image_noise, 4);
  std::uniform_int_distribution<int> side(min_side, max_side);
  for (int b = 0; b < block_count; ++b) {
    const int w = side(rng);
    const int h = side(rng);
    std::uniform_int_distribution<int> xdist(0, img.width - w);
    std::uniform_int_distribution<int> ydist(0, img.height - h);
    const int x0 = xdist(rng);
    const int y0 = ydist(rng);
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) {
        result.mask.set(x, y, true);
        for (int c = 0; c < img.channels; ++c) result.image.at(x, y, c) = 0;
      }
    }
  }
  return result;
}

// --------------------------------------------------------------------------
// Occlusion
// --------------------------------------------------------------------------

// Binary occluder shape, procedural or loaded from an external PGM
// (nonzero = occupied).
struct OccluderMask {
  BoolGrid bitmap;
  enum class Origin { procedural, external } origin = Origin::procedural;
};

inline void validate_occluder(const OccluderMask& mask) {
  if (mask.bitmap.width <= 0 || mask.bitmap.height <= 0)
    throw ValidationError("occluder mask must have positive size");
  if (mask.bitmap.count() == 0)
    throw ValidationError("occluder mask must occupy at least one pixel");
}

inline OccluderMask load_occluder_mask(const std::filesystem::path& path) {
  const PixelGrid img = read_pnm(path);
  if (img.channels != 1)
    throw ValidationError(path.string() +
                          ": occluder masks must be single-channel PGM");
  OccluderMask mask;
  mask.origin = OccluderMask::Origin::external;
  mask.bitmap = BoolGrid::filled(img.width, img.height, false);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y) != 0) mask.bitmap.set(x, y, true);
  validate_occluder(mask);
  return mask;
}

// Deterministic set of procedural occluder shapes cycling through
// rectangles, ellipses, and multi-disc blobs with seeded dimensions in
// [min_size, max_size].
inline std::vector<OccluderMask> procedural_occluders(std::uint64_t seed,
                                                      int count = 8,
                                                      int min_size = 16,
                                                      int max_size = 48) {
  if (count < 1)
    throw ValidationError("procedural_occluders: count must be >= 1");
  if (min_size < 2 || max_size < min_size)
    throw RangeError("procedural_occluders: invalid size range");
  std::mt19937_64 rng = make_rng(seed, RngStage::occluder, 1);
  std::uniform_int_distribution<int> size_dist(min_size, max_size);
  std::vector<OccluderMask> masks;
  masks.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int w = size_dist(rng);
    const int h = size_dist(rng);
    OccluderMask mask;
    mask.bitmap = BoolGrid::filled(w, h, false);
    switch (i % 3) {
      case 0:  // rectangle
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) mask.bitmap.set(x, y, true);
        break;
      case 1: {  // ellipse inscribed in the box
        const double a = w / 2.0, b = h / 2.0;
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const double dx = (x + 0.5 - a) / a;
            const double dy = (y + 0.5 - b) / b;
            if (dx * dx + dy * dy <= 1.0) mask.bitmap.set(x, y, true);
          }
        }
        break;
      }
      default: {  // blob: union of five discs
        std::uniform_real_distribution<double> off(-0.33, 0.33);
        std::uniform_real_distribution<double> rad(1.0 / 6.0, 1.0 / 3.0);
        const double base = std::min(w, h);
        for (int d = 0; d < 5; ++d) {
          const double cx = w / 2.0 + (d == 0 ? 0.0 : off(rng) * w);
          const double cy = h / 2.0 + (d == 0 ? 0.0 : off(rng) * h);
          const double r = std::max(1.0, rad(rng) * base);
          for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
              const double dx = x + 0.5 - cx;
              const double dy = y + 0.5 - cy;
              if (dx * dx + dy * dy <= r * r) mask.bitmap.set(x, y, true);
            }
          }
        }
        break;
      }
    }
    validate_occluder(mask);
    masks.push_back(std::move(mask));
  }
  return masks;
}

// Axis-aligned pixel rectangle (the person's bounding box).
struct PixelBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct OcclusionResult {
  PixelGrid image;
  BoolGrid coverage;        // occluded pixels (whole image)
  double achieved_degree = 0.0;  // covered-in-bbox count / bbox area
  bool cap_hit = false;     // placement attempts ran out before the band
};

// Places occluders (uniform position constrained to overlap the bounding
// box; parts hanging off the image are cropped) and paints them mid-gray
// until the occluded fraction of the box lies within +/-0.02 of
// target_degree or 1000 placement attempts have been consumed. Placements
// that would overshoot target + 0.02 are rejected, so the loop approaches
// the band from below.
inline OcclusionResult occlude(const PixelGrid& img,
                               const std::vector<OccluderMask>& occluders,
                               double target_degree, const PixelBox& bbox,
                               std::uint64_t seed) {
  validate_grid(img);
  if (!(target_degree >= 0.0) || target_degree > kMaxOcclusionDegree)
    throw RangeError("occlude: target degree " +
                     std::to_string(target_degree) + " outside [0, " +
                     std::to_string(kMaxOcclusionDegree) + "]");
  if (bbox.width <= 0 || bbox.height <= 0 || bbox.x < 0 || bbox.y < 0 ||
      bbox.x + bbox.width > img.width || bbox.y + bbox.height > img.height)
    throw ValidationError("occlude: bounding box must lie within the image");
  for (const OccluderMask& mask : occluders) validate_occluder(mask);

  OcclusionResult result{img, BoolGrid::filled(img.width, img.height, false),
                         0.0, false};
  const double area = static_cast<double>(bbox.width) * bbox.height;
  auto in_band = [&](double degree) {
    return std::abs(degree - target_degree) <= kOcclusionTolerance;
  };
  if (in_band(0.0)) return result;
  if (occluders.empty())
    throw ValidationError(
        "occlude: no occluder masks supplied for a nonzero target");

  std::mt19937_64 rng = make_rng(seed, RngStage::occluder, 2);
  std::uniform_int_distribution<int> pick(
      0, static_cast<int>(occluders.size()) - 1);
  std::size_t covered_in_box = 0;
  int attempts = 0;
  while (!in_band(result.achieved_degree) && attempts < kOcclusionAttemptCap) {
    ++attempts;
    const OccluderMask& mask =
        occluders[static_cast<std::size_t>(pick(rng))];
    const int mw = mask.bitmap.width;
    const int mh = mask.bitmap.height;
    // Any placement whose box overlaps the person box is eligible.
    std::uniform_int_distribution<int> xdist(bbox.x - mw + 1,
                                             bbox.x + bbox.width - 1);
    std::uniform_int_distribution<int> ydist(bbox.y - mh + 1,
                                             bbox.y + bbox.height - 1);
    const int x0 = xdist(rng);
    const int y0 = ydist(rng);
    // Count the fresh in-box coverage this placement would add.
    std::size_t fresh = 0;
    for (int my = 0; my < mh; ++my) {
      const int y = y0 + my;
      if (y < bbox.y || y >= bbox.y + bbox.height) continue;
      for (int mx = 0; mx < mw; ++mx) {
        const int x = x0 + mx;
        if (x < bbox.x || x >= bbox.x + bbox.width) continue;
        if (mask.bitmap.test(mx, my) && !result.coverage.test(x, y)) ++fresh;
      }
    }
    const double after =
        static_cast<double>(covered_in_box + fresh) / area;
    if (after > target_degree + kOcclusionTolerance) continue;  // overshoot
    // Commit: paint everywhere the mask lands inside the image.
    for (int my = 0; my < mh; ++my) {
      const int y = y0 + my;
      for (int mx = 0; mx < mw; ++mx) {
        const int x = x0 + mx;
        if (!result.image.in_bounds(x, y) || !mask.bitmap.test(mx, my))
          continue;
        result.coverage.set(x, y, true);
        for (int c = 0; c < img.channels; ++c)
          result.image.at(x, y, c) = kOccluderFill;
      }
    }
    covered_in_box += fresh;
    result.achieved_degree = static_cast<double>(covered_in_box) / area;
  }
  result.cap_hit = !in_band(result.achieved_degree);
  return result;
}

// --------------------------------------------------------------------------
// View-assignment protocol
// --------------------------------------------------------------------------

enum class DeficiencyMode { noise, missing, occlusion };

inline const char* to_string(DeficiencyMode mode) {
  switch (mode) {
    case DeficiencyMode::noise: return "noise";
    case DeficiencyMode::missing: return "missing";
    case DeficiencyMode::occlusion: return "occlusion";
  }
  throw ValidationError("unrepresentable deficiency mode");
}

inline DeficiencyMode parse_deficiency_mode(const std::string& name) {
  if (name == "noise") return DeficiencyMode::noise;
  if (name == "missing") return DeficiencyMode::missing;
  if (name == "occlusion") return DeficiencyMode::occlusion;
  throw ValidationError("unknown deficiency mode '" + name +
                        "' (expected noise, missing, or occlusion)");
}

// The view-assignment protocol: noise and missing flag exactly one view,
// chosen uniformly (the noise sub-kind uniform over the three models);
// occlusion flags ceil(3V/4) views uniformly without replacement — three of
// four in the reference rig. Unflagged views come back clean.
inline std::vector<DeficiencyKind> assign_deficiency(int views,
                                                     DeficiencyMode mode,
                                                     std::uint64_t seed) {
  if (views < 2)
    throw ValidationError("assign_deficiency: protocol needs >= 2 views");
  std::mt19937_64 rng = make_rng(seed, RngStage::assignment,
                                 static_cast<std::uint64_t>(mode));
  std::vector<DeficiencyKind> assignment(
      static_cast<std::size_t>(views), DeficiencyKind::clean);
  std::uniform_int_distribution<int> view_dist(0, views - 1);
  switch (mode) {
    case DeficiencyMode::noise: {
      static constexpr DeficiencyKind kNoise[3] = {DeficiencyKind::gaussian,
                                                   DeficiencyKind::salt_pepper,
                                                   DeficiencyKind::speckle};
      const int view = view_dist(rng);
      std::uniform_int_distribution<int> kind_dist(0, 2);
      assignment[static_cast<std::size_t>(view)] = kNoise[kind_dist(rng)];
      break;
    }
    case DeficiencyMode::missing:
      assignment[static_cast<std::size_t>(view_dist(rng))] =
          DeficiencyKind::missing;
      break;
    case DeficiencyMode::occlusion: {
      const int flagged = (3 * views + 3) / 4;  // ceil(3V/4)
      std::vector<int> order(static_cast<std::size_t>(views));
      for (int v = 0; v < views; ++v) order[static_cast<std::size_t>(v)] = v;
      // Partial Fisher-Yates: the first `flagged` slots are a uniform
      // without-replacement sample.
      for (int i = 0; i < flagged; ++i) {
        std::uniform_int_distribution<int> swap_dist(i, views - 1);
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(swap_dist(rng))]);
      }
      for (int i = 0; i < flagged; ++i)
        assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(
            i)])] = DeficiencyKind::occlusion;
      break;
    }
  }
  return assignment;
}

// --------------------------------------------------------------------------
// Keypoint-level degradation
// --------------------------------------------------------------------------

// How image corruption translates to the keypoint observations the
// geometric estimators consume: noisy views jitter visible joints, missing
// and occluded views drop joints. An explicit modeling choice, echoed in
// reports.
struct DegradeSeverity {
  double noise_sigma_px = 20.0;    // all three noise kinds
  double missing_dropout = 0.8;    // per-joint invisibility probability
  double occlusion_dropout = 0.5;
};

inline void validate_severity(const DegradeSeverity& s) {
  if (!(s.noise_sigma_px >= 0.0))
    throw ValidationError("severity: noise sigma must be >= 0");
  if (!(s.missing_dropout >= 0.0) || !(s.missing_dropout <= 1.0))
    throw RangeError("severity: missing dropout outside [0, 1]");
  if (!(s.occlusion_dropout >= 0.0) || !(s.occlusion_dropout <= 1.0))
    throw RangeError("severity: occlusion dropout outside [0, 1]");
}

// Applies a per-view kind assignment to the keypoint observations. Noisy
// views: every visible joint gets additive N(0, sigma^2) on both pixel
// coordinates. Missing/occluded views: each visible joint independently
// goes invisible (NaN coordinates) with the kind's dropout probability.
// Cell (v, t) draws from stream (seed, degrade, v, t). A kind whose
// severity is exactly zero leaves its views untouched — including their
// clean tags — so zero severity is the identity.
inline MultiViewSequence degrade_observations(
    const MultiViewSequence& mvs,
    const std::vector<DeficiencyKind>& assignment,
    const DegradeSeverity& severity, std::uint64_t seed) {
  validate_mvs(mvs);
  validate_severity(severity);
  if (assignment.size() != static_cast<std::size_t>(mvs.view_count()))
    throw ShapeMismatchError(
        "degrade_observations: assignment covers " +
        std::to_string(assignment.size()) + " views, sequence has " +
        std::to_string(mvs.view_count()));

  MultiViewSequence out = mvs;
  const std::size_t frames = static_cast<std::size_t>(mvs.frame_count());
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    const DeficiencyKind kind = assignment[v];
    if (kind == DeficiencyKind::clean) continue;
    if (is_noise_kind(kind)) {
      const double sigma = severity.noise_sigma_px;
      if (sigma == 0.0) continue;
      for (std::size_t t = 0; t < frames; ++t) {
        std::mt19937_64 rng = make_rng(seed, RngStage::degrade, v, t);
        std::normal_distribution<double> noise(0.0, sigma);
        Pose2D& obs = out.observations[v][t];
        for (int j = 0; j < obs.joint_count(); ++j) {
          if (!obs.visibility[static_cast<std::size_t>(j)]) continue;
          obs.joints(j, 0) += noise(rng);
          obs.joints(j, 1) += noise(rng);
        }
        out.deficiency[v][t] =
            DeficiencyTag{kind, {{"sigma_px", sigma}}};
      }
    } else {
      const double dropout = kind == DeficiencyKind::missing
                                 ? severity.missing_dropout
                                 : severity.occlusion_dropout;
      if (dropout == 0.0) continue;
      for (std::size_t t = 0; t < frames; ++t) {
        std::mt19937_64 rng = make_rng(seed, RngStage::degrade, v, t);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Pose2D& obs = out.observations[v][t];
        for (int j = 0; j < obs.joint_count(); ++j) {
          if (!obs.visibility[static_cast<std::size_t>(j)]) continue;
          if (u(rng) < dropout) {
            obs.visibility[static_cast<std::size_t>(j)] = false;
            obs.joints(j, 0) = kCoordSentinel;
            obs.joints(j, 1) = kCoordSentinel;
          }
        }
        out.deficiency[v][t] = DeficiencyTag{kind, {{"dropout", dropout}}};
      }
    }
  }
  return out;
}

}  // namespace depropose
