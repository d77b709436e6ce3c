// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
//
// Camera model, projection, ray encoding, and DLT triangulation.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "depropose/geometry.hpp"
#include "helpers.hpp"

using namespace depropose;
using test_support::default_rig;
using test_support::random_pose_near;
using test_support::random_rotation;

namespace {

CameraParams identity_camera() {
  CameraParams cam;
  cam.fx = cam.fy = 1000.0;
  cam.cx = cam.cy = 500.0;
  cam.width = cam.height = 1000;
  return cam;
}

double pose_distance_mean(const Pose3D& a, const Pose3D& b) {
  return (a.joints - b.joints).rowwise().norm().mean();
}

}  // namespace

TEST_CASE("project: joint on the optical axis lands on the principal point") {
  Pose3D p;
  p.joints.resize(1, 3);
  p.joints << 0.0, 0.0, 2000.0;
  const Pose2D obs = project(p, identity_camera());
  CHECK(obs.joints(0, 0) == 500.0);
  CHECK(obs.joints(0, 1) == 500.0);
  CHECK(obs.visibility[0]);
}

TEST_CASE("project: hand pinhole arithmetic oracle") {
  // Camera-frame point (100, 0, 2000) with identity extrinsics:
  // u = 1000 * 100 / 2000 + 500 = 550, v = 500.
  Pose3D p;
  p.joints.resize(1, 3);
  p.joints << 100.0, 0.0, 2000.0;
  const Pose2D obs = project(p, identity_camera());
  CHECK(obs.joints(0, 0) == 550.0);
  CHECK(obs.joints(0, 1) == 500.0);
  CHECK(obs.visibility[0]);
}

TEST_CASE("project: joint behind the camera is invisible with sentinels") {
  Pose3D p;
  p.joints.resize(2, 3);
  p.joints << 0.0, 0.0, -1.0,  // behind
      0.0, 0.0, 0.0;           // exactly on the camera plane
  const Pose2D obs = project(p, identity_camera());
  CHECK_FALSE(obs.visibility[0]);
  CHECK_FALSE(obs.visibility[1]);
  CHECK(std::isnan(obs.joints(0, 0)));
  CHECK(std::isnan(obs.joints(0, 1)));
  CHECK(std::isnan(obs.joints(1, 0)));
}

TEST_CASE("project: out-of-frame joint keeps real coordinates") {
  Pose3D p;
  p.joints.resize(1, 3);
  p.joints << 5000.0, 0.0, 2000.0;  // u = 1000*5000/2000 + 500 = 3000 >= W
  const Pose2D obs = project(p, identity_camera());
  CHECK_FALSE(obs.visibility[0]);
  CHECK(obs.joints(0, 0) == 3000.0);
  CHECK(obs.joints(0, 1) == 500.0);
}

TEST_CASE("project: doubling intrinsics doubles pixel coordinates exactly") {
  std::mt19937_64 rng(41);
  CameraParams cam = identity_camera();
  CameraParams doubled = cam;
  doubled.fx *= 2.0;
  doubled.fy *= 2.0;
  doubled.cx *= 2.0;
  doubled.cy *= 2.0;
  doubled.width *= 2;
  doubled.height *= 2;
  for (int trial = 0; trial < 50; ++trial) {
    const Pose3D p =
        random_pose_near(rng, 5, Vector3(0.0, 0.0, 2500.0), 400.0);
    const Pose2D a = project(p, cam);
    const Pose2D b = project(p, doubled);
    for (int j = 0; j < 5; ++j) {
      CHECK(b.joints(j, 0) == 2.0 * a.joints(j, 0));
      CHECK(b.joints(j, 1) == 2.0 * a.joints(j, 1));
    }
  }
}

TEST_CASE("validate_camera rejects broken parameters") {
  CameraParams cam = identity_camera();
  SECTION("non-orthonormal rotation") {
    cam.rotation(0, 0) = 2.0;
    CHECK_THROWS_AS(validate_camera(cam), ValidationError);
  }
  SECTION("reflection") {
    cam.rotation = Matrix3::Identity();
    cam.rotation(2, 2) = -1.0;
    cam.rotation(1, 1) = 1.0;
    CHECK_THROWS_AS(validate_camera(cam), ValidationError);
  }
  SECTION("non-positive focal") {
    cam.fx = 0.0;
    CHECK_THROWS_AS(validate_camera(cam), ValidationError);
  }
  SECTION("principal point outside the image") {
    cam.cx = 1000.0;  // == width
    CHECK_THROWS_AS(validate_camera(cam), ValidationError);
  }
  SECTION("non-positive image size") {
    cam.width = 0;
    CHECK_THROWS_AS(validate_camera(cam), ValidationError);
  }
}

TEST_CASE("view_ray_angles: convention anchors") {
  CameraParams cam = identity_camera();  // centre at world origin
  SECTION("target on +X: azimuth 0, elevation 0") {
    const RayEncoding enc = view_ray_angles(cam, Vector3(1.0, 0.0, 0.0));
    CHECK(enc.azimuth == 0.0);
    CHECK(enc.elevation == 0.0);
    CHECK(enc.encoded[0] == 0.0);
    CHECK(enc.encoded[1] == 1.0);
  }
  SECTION("target straight above: elevation pi/2, azimuth tie-broken to 0") {
    const RayEncoding enc = view_ray_angles(cam, Vector3(0.0, 0.0, 7.0));
    CHECK(enc.azimuth == 0.0);
    CHECK(enc.elevation == Catch::Approx(M_PI / 2).margin(1e-15));
  }
  SECTION("target on +Y: azimuth pi/2") {
    const RayEncoding enc = view_ray_angles(cam, Vector3(0.0, 3.0, 0.0));
    CHECK(enc.azimuth == Catch::Approx(M_PI / 2).margin(1e-15));
  }
  SECTION("coincident target: degenerate ray error") {
    CHECK_THROWS_AS(view_ray_angles(cam, Vector3(0.0, 0.0, 0.0)),
                    DegenerateRayError);
  }
}

TEST_CASE("view_ray_angles: unit-circle identity and ranges hold broadly") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-5000.0, 5000.0);
  CameraParams cam = identity_camera();
  for (int trial = 0; trial < 500; ++trial) {
    cam.rotation = random_rotation(rng);
    cam.translation = Vector3(u(rng), u(rng), u(rng));
    const Vector3 target(u(rng), u(rng), u(rng));
    if ((target - cam.center()).norm() < 1.0) continue;
    const RayEncoding enc = view_ray_angles(cam, target);
    CHECK(std::abs(enc.encoded[0] * enc.encoded[0] +
                   enc.encoded[1] * enc.encoded[1] - 1.0) < 1e-12);
    CHECK(std::abs(enc.encoded[2] * enc.encoded[2] +
                   enc.encoded[3] * enc.encoded[3] - 1.0) < 1e-12);
    CHECK(enc.azimuth > -M_PI);
    CHECK(enc.azimuth <= M_PI);
    CHECK(enc.elevation >= -M_PI / 2);
    CHECK(enc.elevation <= M_PI / 2);
  }
}

TEST_CASE("circular_rig aims every camera at the target") {
  const std::vector<CameraParams> rig = default_rig(4);
  REQUIRE(rig.size() == 4);
  Pose3D target;
  target.joints.resize(1, 3);
  target.joints << 0.0, 0.0, 1000.0;
  for (const CameraParams& cam : rig) {
    validate_camera(cam);
    const Pose2D obs = project(target, cam);
    // The aim point sits on the optical axis, i.e. the principal point.
    CHECK(std::abs(obs.joints(0, 0) - cam.cx) < 1e-9);
    CHECK(std::abs(obs.joints(0, 1) - cam.cy) < 1e-9);
  }
  // Views are distinct positions on the ring.
  CHECK((rig[0].center() - rig[2].center()).norm() > 1000.0);
}

TEST_CASE("triangulate: four-view round trip recovers the pose") {
  std::mt19937_64 rng(43);
  const auto rig = default_rig(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Pose3D p =
        random_pose_near(rng, 17, Vector3(0.0, 0.0, 1000.0), 600.0);
    std::vector<Pose2D> obs;
    for (const auto& cam : rig) obs.push_back(project(p, cam));
    const TriangulationResult res = triangulate(obs, rig);
    CHECK(pose_distance_mean(res.pose, p) < 1e-3);
    CHECK(res.ill_conditioned_joints.empty());
  }
}

TEST_CASE("triangulate: zero-weight view equals omitting the view") {
  std::mt19937_64 rng(44);
  const auto rig4 = default_rig(4);
  const std::vector<CameraParams> rig3(rig4.begin(), rig4.begin() + 3);
  for (int trial = 0; trial < 10; ++trial) {
    const Pose3D p =
        random_pose_near(rng, 17, Vector3(0.0, 0.0, 1000.0), 500.0);
    std::vector<Pose2D> obs4;
    for (const auto& cam : rig4) obs4.push_back(project(p, cam));
    const std::vector<Pose2D> obs3(obs4.begin(), obs4.begin() + 3);

    std::uniform_real_distribution<double> wdist(0.2, 3.0);
    const std::vector<double> w4{wdist(rng), wdist(rng), wdist(rng), 0.0};
    const std::vector<double> w3(w4.begin(), w4.begin() + 3);

    const Pose3D a = triangulate(obs4, rig4, w4).pose;
    const Pose3D b = triangulate(obs3, rig3, w3).pose;
    // Zero-weight rows are excluded from the system entirely, so the two
    // solves factor identical matrices.
    for (int j = 0; j < 17; ++j)
      for (int k = 0; k < 3; ++k) CHECK(a.joints(j, k) == b.joints(j, k));
  }
}

TEST_CASE("triangulate: weighted solve scales constraint rows") {
  // Sanity rather than bitwise: strongly down-weighting a corrupted view
  // moves the solution toward the clean-view answer.
  const auto rig = default_rig(4);
  Pose3D p;
  p.joints.resize(1, 3);
  p.joints << 120.0, -80.0, 1100.0;
  std::vector<Pose2D> obs;
  for (const auto& cam : rig) obs.push_back(project(p, cam));
  obs[3].joints(0, 0) += 40.0;  // corrupt one view by 40 px
  const std::vector<double> balanced{1.0, 1.0, 1.0, 1.0};
  const std::vector<double> downweighted{1.0, 1.0, 1.0, 1e-4};
  const double err_balanced =
      (triangulate(obs, rig, balanced).pose.joints - p.joints).norm();
  const double err_down =
      (triangulate(obs, rig, downweighted).pose.joints - p.joints).norm();
  CHECK(err_down < err_balanced);
  CHECK(err_down < 1e-2);
}

TEST_CASE("triangulate: a joint seen by fewer than two views is an error") {
  const auto rig = default_rig(2);
  Pose3D p;
  p.joints.resize(3, 3);
  p.joints << 0.0, 0.0, 1000.0, 100.0, 50.0, 1200.0, -80.0, 30.0, 900.0;
  std::vector<Pose2D> obs;
  for (const auto& cam : rig) obs.push_back(project(p, cam));
  obs[1].visibility[2] = false;  // joint 2 now visible in one view only
  try {
    triangulate(obs, rig);
    FAIL("expected UnderdeterminedJointError");
  } catch (const UnderdeterminedJointError& e) {
    CHECK(e.joint() == 2);
  }
}

TEST_CASE("triangulate: zero weight can also underdetermine a joint") {
  const auto rig = default_rig(3);
  Pose3D p;
  p.joints.resize(1, 3);
  p.joints << 0.0, 0.0, 1000.0;
  std::vector<Pose2D> obs;
  for (const auto& cam : rig) obs.push_back(project(p, cam));
  const std::vector<double> w{1.0, 0.0, 0.0};
  CHECK_THROWS_AS(triangulate(obs, rig, w), UnderdeterminedJointError);
}

TEST_CASE("triangulate: near-parallel rays are flagged ill-conditioned") {
  // Two cameras a hair's breadth apart see the joint along almost the same
  // ray; the DLT system is numerically rank-deficient.
  const Vector3 target(0.0, 0.0, 1000.0);
  std::vector<CameraParams> rig;
  rig.push_back(look_at_camera(Vector3(3000.0, 0.0, 1000.0), target, 1100.0,
                               1100.0, 1024, 1024, 0));
  rig.push_back(look_at_camera(Vector3(3000.0, 1e-6, 1000.0), target, 1100.0,
                               1100.0, 1024, 1024, 1));
  Pose3D p;
  p.joints.resize(1, 3);
  p.joints << 60.0, 40.0, 1050.0;
  std::vector<Pose2D> obs;
  for (const auto& cam : rig) obs.push_back(project(p, cam));
  const TriangulationResult res = triangulate(obs, rig);
  REQUIRE(res.ill_conditioned_joints.size() == 1);
  CHECK(res.ill_conditioned_joints[0] == 0);
}

TEST_CASE("triangulate: input validation") {
  const auto rig = default_rig(2);
  Pose3D p;
  p.joints.resize(1, 3);
  p.joints << 0.0, 0.0, 1000.0;
  std::vector<Pose2D> obs;
  for (const auto& cam : rig) obs.push_back(project(p, cam));

  SECTION("view count mismatch") {
    CHECK_THROWS_AS(triangulate({obs[0]}, rig), ShapeMismatchError);
  }
  SECTION("weight count mismatch") {
    const std::vector<double> w{1.0};
    CHECK_THROWS_AS(triangulate(obs, rig, w), ShapeMismatchError);
  }
  SECTION("negative weight") {
    const std::vector<double> w{1.0, -0.5};
    CHECK_THROWS_AS(triangulate(obs, rig, w), ValidationError);
  }
  SECTION("no views") {
    CHECK_THROWS_AS(triangulate({}, {}), ValidationError);
  }
  SECTION("joint count mismatch between views") {
    std::vector<Pose2D> bad = obs;
    bad[1] = Pose2D::hidden(5);
    CHECK_THROWS_AS(triangulate(bad, rig), ShapeMismatchError);
  }
}

TEST_CASE("round-trip property over random rigs and poses") {
  std::mt19937_64 rng(45);
  std::uniform_int_distribution<int> vdist(3, 6);
  std::uniform_real_distribution<double> rdist(2200.0, 4200.0);
  std::uniform_real_distribution<double> hdist(400.0, 2400.0);
  for (int trial = 0; trial < 15; ++trial) {
    const int views = vdist(rng);
    const auto rig =
        circular_rig(views, rdist(rng), hdist(rng),
                     Vector3(0.0, 0.0, 1000.0), 1100.0, 1100.0, 1024, 1024);
    const Pose3D p =
        random_pose_near(rng, 17, Vector3(0.0, 0.0, 1000.0), 500.0);
    std::vector<Pose2D> obs;
    for (const auto& cam : rig) obs.push_back(project(p, cam));
    const TriangulationResult res = triangulate(obs, rig);
    CHECK(pose_distance_mean(res.pose, p) < 1e-3);
  }
}
