// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace depropose {

// Root of the library's error hierarchy. Every condition the library raises
// deliberately derives from this, so callers can distinguish our diagnostics
// from foreign exceptions with a single catch clause.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value or structure failed a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Two containers that must agree in dimension do not.
class ShapeMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A scalar parameter lies outside its documented range.
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A view ray could not be formed (target coincides with the camera center).
class DegenerateRayError : public Error {
 public:
  using Error::Error;
};

// Rigid alignment is not unique (rank-deficient point configuration).
class DegenerateAlignmentError : public Error {
 public:
  using Error::Error;
};

// Triangulation of one joint had fewer than two usable views.
class UnderdeterminedJointError : public Error {
 public:
  explicit UnderdeterminedJointError(int joint)
      : Error("joint " + std::to_string(joint) +
              " is usable in fewer than two views; triangulation is "
              "underdetermined"),
        joint_(joint) {}
  int joint() const noexcept { return joint_; }

 private:
  int joint_;
};

// An error term is undefined because the inputs share no visible joints.
class NoOverlapError : public Error {
 public:
  using Error::Error;
};

// A file declares a schema version this build does not understand.
class DatasetVersionError : public Error {
 public:
  using Error::Error;
};

// A file is unreadable, truncated, or fails its embedded checksum.
class DatasetIntegrityError : public Error {
 public:
  using Error::Error;
};

// Fixed-precision decimal formatting. The standard library's float-to-text
// behaviour is locale-immune only through snprintf, and the toolchain here
// does not ship <format>, so text artifacts (CSV, SVG) funnel through this.
inline std::string to_fixed(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  return buf;
}

inline std::string to_hex64(unsigned long long value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", value);
  return buf;
}

}  // namespace depropose
