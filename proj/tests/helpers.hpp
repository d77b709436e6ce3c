// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Geometry>
#include <random>
#include <vector>

#include "depropose/geometry.hpp"

namespace test_support {

// Uniform random rotation from a normalised Gaussian quaternion.
inline depropose::Matrix3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  while (q.norm() < 1e-6)
    q = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Cloud of `joints` points within +/- spread_mm of `center` per axis.
inline depropose::Pose3D random_pose_near(std::mt19937_64& rng, int joints,
                                          const depropose::Vector3& center,
                                          double spread_mm) {
  std::uniform_real_distribution<double> u(-spread_mm, spread_mm);
  depropose::Pose3D p;
  p.joints.resize(joints, 3);
  for (int j = 0; j < joints; ++j)
    p.joints.row(j) =
        (center + depropose::Vector3(u(rng), u(rng), u(rng))).transpose();
  return p;
}

// Standard four-camera ring used across suites: radius 3 m, height 1.6 m,
// aimed at a point 1 m above the origin.
inline std::vector<depropose::CameraParams> default_rig(int views = 4) {
  return depropose::circular_rig(views, 3000.0, 1600.0,
                                 depropose::Vector3(0.0, 0.0, 1000.0), 1100.0,
                                 1100.0, 1024, 1024);
}

}  // namespace test_support
