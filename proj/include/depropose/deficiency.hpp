// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "depropose/common.hpp"

namespace depropose {

// The corruption vocabulary. Every (view, frame) cell of a multi-view
// sequence carries exactly one kind; "clean" means untouched.
enum class DeficiencyKind {
  clean,
  gaussian,
  salt_pepper,
  speckle,
  missing,
  occlusion,
};

inline const char* to_string(DeficiencyKind kind) {
  switch (kind) {
    case DeficiencyKind::clean: return "clean";
    case DeficiencyKind::gaussian: return "gaussian";
    case DeficiencyKind::salt_pepper: return "salt_pepper";
    case DeficiencyKind::speckle: return "speckle";
    case DeficiencyKind::missing: return "missing";
    case DeficiencyKind::occlusion: return "occlusion";
  }
  throw ValidationError("unrepresentable deficiency kind");
}

inline DeficiencyKind parse_deficiency_kind(const std::string& name) {
  if (name == "clean") return DeficiencyKind::clean;
  if (name == "gaussian") return DeficiencyKind::gaussian;
  if (name == "salt_pepper") return DeficiencyKind::salt_pepper;
  if (name == "speckle") return DeficiencyKind::speckle;
  if (name == "missing") return DeficiencyKind::missing;
  if (name == "occlusion") return DeficiencyKind::occlusion;
  throw ValidationError("unknown deficiency kind '" + name + "'");
}

inline bool is_noise_kind(DeficiencyKind kind) {
  return kind == DeficiencyKind::gaussian ||
         kind == DeficiencyKind::salt_pepper ||
         kind == DeficiencyKind::speckle;
}

// Annotation on one (view, frame) cell: what was applied and with which
// parameters (sigma, density, dropout, degree, ...). Clean cells carry no
// parameters; occlusion degree, when recorded, is capped at 0.7.
struct DeficiencyTag {
  DeficiencyKind kind = DeficiencyKind::clean;
  std::map<std::string, double> params;
};

inline void validate_tag(const DeficiencyTag& tag) {
  if (tag.kind == DeficiencyKind::clean && !tag.params.empty())
    throw ValidationError("clean deficiency tag must carry no parameters");
  if (tag.kind != DeficiencyKind::clean && tag.params.empty())
    throw ValidationError(std::string("deficiency tag '") +
                          to_string(tag.kind) +
                          "' must carry its parameters");
  const auto degree = tag.params.find("degree");
  if (degree != tag.params.end() &&
      (degree->second < 0.0 || degree->second > 0.7))
    throw RangeError("occlusion degree " + std::to_string(degree->second) +
                     " outside [0, 0.7]");
}

}  // namespace depropose
