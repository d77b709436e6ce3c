// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
//
// Noise models, missing blocks, occlusion, the view-assignment protocol,
// and keypoint-level degradation.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <map>

#include "depropose/corruption.hpp"
#include "helpers.hpp"

using namespace depropose;
using test_support::default_rig;

namespace {

// Mean / standard deviation of (corrupted - original) over all samples.
struct Residuals {
  double mean = 0.0;
  double stddev = 0.0;
  long n = 0;
};

Residuals pixel_residuals(const PixelGrid& before, const PixelGrid& after) {
  REQUIRE(before.same_shape(after));
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < before.data.size(); ++i) {
    const double r = static_cast<double>(after.data[i]) -
                     static_cast<double>(before.data[i]);
    sum += r;
    sq += r * r;
  }
  Residuals res;
  res.n = static_cast<long>(before.data.size());
  res.mean = sum / static_cast<double>(res.n);
  res.stddev =
      std::sqrt(sq / static_cast<double>(res.n) - res.mean * res.mean);
  return res;
}

MultiViewSequence idle_mvs(int frames, double sigma = 0.0,
                           std::uint64_t seed = 3) {
  const SkeletonModel m = SkeletonModel::human17();
  const MotionSequence seq =
      generate_motion(m, ActionPreset::idle, frames, seed);
  return render_observations(seq, default_rig(4), sigma, seed);
}

bool observations_identical(const MultiViewSequence& a,
                            const MultiViewSequence& b) {
  if (a.view_count() != b.view_count() || a.frame_count() != b.frame_count())
    return false;
  for (int v = 0; v < a.view_count(); ++v) {
    for (int t = 0; t < a.frame_count(); ++t) {
      const Pose2D& oa = a.observations[static_cast<std::size_t>(v)]
                                       [static_cast<std::size_t>(t)];
      const Pose2D& ob = b.observations[static_cast<std::size_t>(v)]
                                       [static_cast<std::size_t>(t)];
      if (oa.visibility != ob.visibility) return false;
      for (int j = 0; j < oa.joint_count(); ++j) {
        for (int k = 0; k < 2; ++k) {
          const double x = oa.joints(j, k), y = ob.joints(j, k);
          if (x != y && !(std::isnan(x) && std::isnan(y))) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("gaussian_noise: identity at sigma 0, statistics at sigma 10") {
  const PixelGrid base = PixelGrid::filled(1000, 1000, 1, 128);
  SECTION("sigma 0 is the identity") {
    CHECK(gaussian_noise(base, 0.0, 1).data == base.data);
  }
  SECTION("sample std within 2% of sigma at n=10^6") {
    const PixelGrid noisy = gaussian_noise(base, 10.0, 1);
    const Residuals res = pixel_residuals(base, noisy);
    REQUIRE(res.n == 1000000);
    CHECK(res.stddev > 9.8);
    CHECK(res.stddev < 10.2);
    CHECK(std::abs(res.mean) < 0.05);
  }
  SECTION("clamping keeps a saturated image in range") {
    const PixelGrid bright = PixelGrid::filled(512, 512, 1, 255);
    const PixelGrid noisy = gaussian_noise(bright, 10.0, 2);
    for (const std::uint8_t px : noisy.data) CHECK(px >= 200);
  }
  SECTION("deterministic per seed") {
    CHECK(gaussian_noise(base, 5.0, 9).data ==
          gaussian_noise(base, 5.0, 9).data);
    CHECK(gaussian_noise(base, 5.0, 9).data !=
          gaussian_noise(base, 5.0, 10).data);
  }
  SECTION("negative sigma rejected") {
    CHECK_THROWS_AS(gaussian_noise(base, -1.0, 1), ValidationError);
  }
}

TEST_CASE("salt_pepper follows the three-case rule") {
  const PixelGrid base = PixelGrid::filled(1000, 1000, 1, 128);
  SECTION("p 0 is the identity") {
    CHECK(salt_pepper(base, 0.0, 1).data == base.data);
  }
  SECTION("p 1 leaves only salt and pepper") {
    const PixelGrid out = salt_pepper(base, 1.0, 1);
    for (const std::uint8_t px : out.data)
      CHECK((px == 0 || px == 255));
  }
  SECTION("altered fraction within the 99% binomial CI of p=0.1") {
    const PixelGrid out = salt_pepper(base, 0.1, 9);
    long altered = 0, salt = 0, pepper = 0;
    for (const std::uint8_t px : out.data) {
      if (px == 128) continue;
      ++altered;
      if (px == 255) ++salt;
      if (px == 0) ++pepper;
    }
    CHECK(altered == salt + pepper);  // only the two replacement values
    const double n = 1e6;
    const double half_width = 2.5758 * std::sqrt(0.1 * 0.9 / n);
    CHECK(std::abs(altered / n - 0.1) < half_width);
    // Salt and pepper each hit with probability p/2.
    const double sub_width = 2.5758 * std::sqrt(0.05 * 0.95 / n);
    CHECK(std::abs(salt / n - 0.05) < sub_width);
    CHECK(std::abs(pepper / n - 0.05) < sub_width);
  }
  SECTION("a hit flips all channels together") {
    PixelGrid rgb = PixelGrid::filled(100, 100, 3, 128);
    const PixelGrid out = salt_pepper(rgb, 0.5, 3);
    for (std::size_t px = 0; px < out.pixel_count(); ++px) {
      const std::uint8_t r = out.data[px * 3];
      CHECK(out.data[px * 3 + 1] == r);
      CHECK(out.data[px * 3 + 2] == r);
    }
  }
  SECTION("density outside [0,1] rejected") {
    CHECK_THROWS_AS(salt_pepper(base, 1.5, 1), RangeError);
    CHECK_THROWS_AS(salt_pepper(base, -0.1, 1), RangeError);
  }
}

TEST_CASE("speckle is multiplicative") {
  SECTION("sigma 0 is the identity") {
    const PixelGrid base = PixelGrid::filled(64, 64, 1, 77);
    CHECK(speckle(base, 0.0, 1).data == base.data);
  }
  SECTION("zero image is a fixed point for any sigma") {
    const PixelGrid zeros = PixelGrid::filled(256, 256, 1, 0);
    const PixelGrid out = speckle(zeros, 5.0, 1);
    CHECK(out.data == zeros.data);
  }
  SECTION("uniform-100 mean preserved at sigma 0.1, n=10^6") {
    const PixelGrid base = PixelGrid::filled(1000, 1000, 1, 100);
    const PixelGrid out = speckle(base, 0.1, 11);
    const Residuals res = pixel_residuals(base, out);
    CHECK(std::abs(res.mean) < 0.5);  // mean in [99.5, 100.5]
    // Multiplicative scale: std ~ 100 * 0.1 = 10.
    CHECK(res.stddev > 9.0);
    CHECK(res.stddev < 11.0);
  }
}

TEST_CASE("missing_blocks blacks out exactly the masked pixels") {
  const PixelGrid base = PixelGrid::filled(224, 224, 1, 200);
  SECTION("zero blocks is the identity with an empty mask") {
    const MissingBlocksResult res = missing_blocks(base, 0, {10, 20}, 1);
    CHECK(res.image.data == base.data);
    CHECK(res.mask.count() == 0);
  }
  SECTION("mask and image agree; complement untouched; area bounded") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const MissingBlocksResult res =
          missing_blocks(base, 5, {10, 20}, seed);
      std::size_t masked = 0;
      for (int y = 0; y < 224; ++y) {
        for (int x = 0; x < 224; ++x) {
          if (res.mask.test(x, y)) {
            ++masked;
            CHECK(res.image.at(x, y) == 0);
          } else {
            CHECK(res.image.at(x, y) == 200);
          }
        }
      }
      CHECK(masked == res.mask.count());
      // 5 blocks of side 10..20: union in [single smallest block, 5 * 400].
      CHECK(masked >= 100);
      CHECK(masked <= 5 * 400);
    }
  }
  SECTION("invalid size ranges rejected") {
    CHECK_THROWS_AS(missing_blocks(base, 1, {0, 10}, 1), RangeError);
    CHECK_THROWS_AS(missing_blocks(base, 1, {20, 10}, 1), RangeError);
    CHECK_THROWS_AS(missing_blocks(base, 1, {10, 500}, 1), RangeError);
  }
}

TEST_CASE("occlude hits the target degree band") {
  const PixelGrid base = PixelGrid::filled(256, 256, 1, 230);
  const PixelBox bbox{48, 32, 160, 192};
  const std::vector<OccluderMask> occluders = procedural_occluders(5);

  SECTION("target 0 is the identity") {
    const OcclusionResult res = occlude(base, occluders, 0.0, bbox, 1);
    CHECK(res.image.data == base.data);
    CHECK(res.achieved_degree == 0.0);
    CHECK_FALSE(res.cap_hit);
  }
  SECTION("degree sweep: targets 0.1 through 0.7 within +/-0.02") {
    for (const double target : {0.1, 0.3, 0.5, 0.7}) {
      const OcclusionResult res = occlude(base, occluders, target, bbox, 21);
      CHECK_FALSE(res.cap_hit);
      CHECK(std::abs(res.achieved_degree - target) <= 0.02);
    }
  }
  SECTION("achieved degree is an exact recount of covered box pixels") {
    const OcclusionResult res = occlude(base, occluders, 0.5, bbox, 4);
    std::size_t in_box = 0;
    for (int y = 0; y < 256; ++y) {
      for (int x = 0; x < 256; ++x) {
        const bool covered = res.coverage.test(x, y);
        if (covered) {
          CHECK(res.image.at(x, y) == kOccluderFill);
          if (x >= bbox.x && x < bbox.x + bbox.width && y >= bbox.y &&
              y < bbox.y + bbox.height)
            ++in_box;
        } else {
          CHECK(res.image.at(x, y) == 230);
        }
      }
    }
    const double recount = static_cast<double>(in_box) /
                           (static_cast<double>(bbox.width) * bbox.height);
    CHECK(recount == res.achieved_degree);
  }
  SECTION("requests beyond 0.7 are rejected") {
    CHECK_THROWS_AS(occlude(base, occluders, 0.8, bbox, 1), RangeError);
  }
  SECTION("bounding box must sit inside the image") {
    CHECK_THROWS_AS(occlude(base, occluders, 0.3,
                            PixelBox{200, 200, 100, 100}, 1),
                    ValidationError);
  }
  SECTION("deterministic per seed") {
    const OcclusionResult a = occlude(base, occluders, 0.4, bbox, 8);
    const OcclusionResult b = occlude(base, occluders, 0.4, bbox, 8);
    CHECK(a.image.data == b.image.data);
    CHECK(a.achieved_degree == b.achieved_degree);
  }
}

TEST_CASE("procedural occluders are valid and deterministic") {
  const std::vector<OccluderMask> a = procedural_occluders(5, 9, 12, 40);
  const std::vector<OccluderMask> b = procedural_occluders(5, 9, 12, 40);
  REQUIRE(a.size() == 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK_NOTHROW(validate_occluder(a[i]));
    CHECK(a[i].bitmap.cells == b[i].bitmap.cells);
    CHECK(a[i].origin == OccluderMask::Origin::procedural);
  }
}

TEST_CASE("external occluder masks load from PGM") {
  PixelGrid img = PixelGrid::filled(8, 6, 1, 0);
  img.at(3, 2) = 255;
  img.at(4, 2) = 17;  // any nonzero counts as occupied
  const auto path = std::filesystem::temp_directory_path() / "occ_mask.pgm";
  write_pnm(img, path);
  const OccluderMask mask = load_occluder_mask(path);
  CHECK(mask.origin == OccluderMask::Origin::external);
  CHECK(mask.bitmap.count() == 2);
  CHECK(mask.bitmap.test(3, 2));
  CHECK(mask.bitmap.test(4, 2));
  std::filesystem::remove(path);

  const PixelGrid blank = PixelGrid::filled(4, 4, 1, 0);
  write_pnm(blank, path);
  CHECK_THROWS_AS(load_occluder_mask(path), ValidationError);
  std::filesystem::remove(path);
}

TEST_CASE("assign_deficiency implements the protocol") {
  SECTION("V=4 missing flags exactly one view") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto kinds = assign_deficiency(4, DeficiencyMode::missing, seed);
      int flagged = 0;
      for (const DeficiencyKind k : kinds)
        if (k != DeficiencyKind::clean) {
          ++flagged;
          CHECK(k == DeficiencyKind::missing);
        }
      CHECK(flagged == 1);
    }
  }
  SECTION("V=4 noise flags exactly one view with a noise kind") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto kinds = assign_deficiency(4, DeficiencyMode::noise, seed);
      int flagged = 0;
      for (const DeficiencyKind k : kinds)
        if (k != DeficiencyKind::clean) {
          ++flagged;
          CHECK(is_noise_kind(k));
        }
      CHECK(flagged == 1);
    }
  }
  SECTION("V=4 occlusion flags exactly three views") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto kinds =
          assign_deficiency(4, DeficiencyMode::occlusion, seed);
      int flagged = 0;
      for (const DeficiencyKind k : kinds)
        if (k == DeficiencyKind::occlusion) ++flagged;
      CHECK(flagged == 3);
    }
  }
  SECTION("generalization: ceil(3V/4) views at other V") {
    const auto five = assign_deficiency(5, DeficiencyMode::occlusion, 1);
    CHECK(std::count(five.begin(), five.end(), DeficiencyKind::occlusion) ==
          4);  // ceil(15/4)
    const auto two = assign_deficiency(2, DeficiencyMode::occlusion, 1);
    CHECK(std::count(two.begin(), two.end(), DeficiencyKind::occlusion) == 2);
  }
  SECTION("per-view frequencies pass chi-square at 99% over 10^4 draws") {
    long counts[4] = {0, 0, 0, 0};
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      const auto kinds = assign_deficiency(4, DeficiencyMode::noise, seed);
      for (int v = 0; v < 4; ++v)
        if (kinds[static_cast<std::size_t>(v)] != DeficiencyKind::clean)
          counts[v] += 1;
    }
    const double expected = 10000.0 / 4.0;
    double chi2 = 0.0;
    for (const long c : counts) {
      const double d = static_cast<double>(c) - expected;
      chi2 += d * d / expected;
    }
    CHECK(chi2 < 11.345);  // 99% critical value, df=3
  }
  SECTION("fewer than two views rejected") {
    CHECK_THROWS_AS(assign_deficiency(1, DeficiencyMode::noise, 1),
                    ValidationError);
  }
}

TEST_CASE("degrade_observations: zero severity is the identity") {
  const MultiViewSequence mvs = idle_mvs(10);
  const std::vector<DeficiencyKind> assignment{
      DeficiencyKind::gaussian, DeficiencyKind::missing,
      DeficiencyKind::occlusion, DeficiencyKind::clean};
  DegradeSeverity zero;
  zero.noise_sigma_px = 0.0;
  zero.missing_dropout = 0.0;
  zero.occlusion_dropout = 0.0;
  const MultiViewSequence out =
      degrade_observations(mvs, assignment, zero, 5);
  CHECK(observations_identical(mvs, out));
  for (int v = 0; v < 4; ++v)
    for (int t = 0; t < 10; ++t)
      CHECK(out.deficiency[static_cast<std::size_t>(v)]
                          [static_cast<std::size_t>(t)]
                .kind == DeficiencyKind::clean);
}

TEST_CASE("degrade_observations: dropout 1.0 empties the flagged view") {
  const MultiViewSequence mvs = idle_mvs(8);
  const std::vector<DeficiencyKind> assignment{
      DeficiencyKind::missing, DeficiencyKind::clean, DeficiencyKind::clean,
      DeficiencyKind::clean};
  DegradeSeverity sev;
  sev.missing_dropout = 1.0;
  const MultiViewSequence out = degrade_observations(mvs, assignment, sev, 5);
  for (int t = 0; t < 8; ++t) {
    const Pose2D& obs = out.observations[0][static_cast<std::size_t>(t)];
    CHECK(obs.visible_count() == 0);
    CHECK(out.deficiency[0][static_cast<std::size_t>(t)].kind ==
          DeficiencyKind::missing);
    CHECK(out.deficiency[0][static_cast<std::size_t>(t)].params.at(
              "dropout") == 1.0);
  }
  // Unflagged views are bit-identical to the input.
  for (int v = 1; v < 4; ++v)
    for (int t = 0; t < 8; ++t) {
      const Pose2D& before = mvs.observations[static_cast<std::size_t>(v)]
                                             [static_cast<std::size_t>(t)];
      const Pose2D& after = out.observations[static_cast<std::size_t>(v)]
                                            [static_cast<std::size_t>(t)];
      CHECK(before.visibility == after.visibility);
      for (int j = 0; j < before.joint_count(); ++j)
        for (int k = 0; k < 2; ++k)
          if (before.visibility[static_cast<std::size_t>(j)])
            CHECK(before.joints(j, k) == after.joints(j, k));
    }
}

TEST_CASE("degrade_observations: noise sigma statistics") {
  // 17 joints x 600 frames = 10200 joints in the flagged view.
  const MultiViewSequence mvs = idle_mvs(600);
  const std::vector<DeficiencyKind> assignment{
      DeficiencyKind::speckle, DeficiencyKind::clean, DeficiencyKind::clean,
      DeficiencyKind::clean};
  DegradeSeverity sev;
  sev.noise_sigma_px = 20.0;
  const MultiViewSequence out = degrade_observations(mvs, assignment, sev, 5);
  double sum = 0.0, sq = 0.0;
  long n = 0;
  for (int t = 0; t < 600; ++t) {
    const Pose2D& a = mvs.observations[0][static_cast<std::size_t>(t)];
    const Pose2D& b = out.observations[0][static_cast<std::size_t>(t)];
    for (int j = 0; j < a.joint_count(); ++j) {
      if (!a.visibility[static_cast<std::size_t>(j)]) continue;
      for (int k = 0; k < 2; ++k) {
        const double r = b.joints(j, k) - a.joints(j, k);
        sum += r;
        sq += r * r;
        ++n;
      }
    }
  }
  REQUIRE(n >= 20000);
  const double mean = sum / static_cast<double>(n);
  const double stddev = std::sqrt(sq / static_cast<double>(n) - mean * mean);
  CHECK(stddev > 19.0);
  CHECK(stddev < 21.0);
  CHECK(out.deficiency[0][0].params.at("sigma_px") == 20.0);
}

TEST_CASE("degrade_observations validates the assignment length") {
  const MultiViewSequence mvs = idle_mvs(3);
  const std::vector<DeficiencyKind> short_assignment{DeficiencyKind::clean};
  CHECK_THROWS_AS(
      degrade_observations(mvs, short_assignment, DegradeSeverity{}, 1),
      ShapeMismatchError);
}
