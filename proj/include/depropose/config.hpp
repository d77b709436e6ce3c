// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a strict JSON schema with explicit defaults.
// Unknown keys are rejected (typos should fail loudly, not silently run a
// different experiment) and every validation error names the field path.
#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "depropose/common.hpp"
#include "depropose/corruption.hpp"
#include "depropose/fusion.hpp"
#include "depropose/geometry.hpp"
#include "depropose/serialize.hpp"
#include "depropose/skeleton.hpp"
#include "depropose/version.hpp"

namespace depropose {

// Camera layout: the circular preset (evenly spaced ring aimed at a target)
// or a fully explicit camera list.
struct RigConfig {
  std::string preset = "circular";  // "circular" | "explicit"
  int views = 4;
  double radius_mm = 3000.0;
  double height_mm = 1600.0;
  double fx = 1100.0;
  double fy = 1100.0;
  int width = 1024;
  int height = 1024;
  Vector3 target = Vector3(0.0, 0.0, 1000.0);
  std::vector<CameraParams> cameras;  // preset == "explicit" only
};

struct SkeletonConfig {
  std::string model = "human17";  // "human17" | "chain"
  double scale = 1.0;             // human17 only
  int joints = 17;                // chain only
  double segment_mm = 250.0;      // chain only
};

struct MotionConfig {
  std::vector<ActionPreset> actions{ActionPreset::walk};
  int frames = 100;
  double frame_rate = 50.0;
};

struct CorruptionConfig {
  bool enabled = false;
  DeficiencyMode mode = DeficiencyMode::noise;
  double observation_sigma_px = 0.5;  // baseline detector jitter, all views
  DegradeSeverity severity;
  double occlusion_degree = 0.5;  // image-space occlusion target
};

struct EstimatorConfig {
  CandidateScheme scheme = CandidateScheme::triangulation_pairs;
  EstimateMode weighting = EstimateMode::training;
  double epsilon = 1e-6;
  Reduction reduction = Reduction::mean_abs;
  std::vector<FusionMode> fusion_modes{FusionMode::adaptive,
                                       FusionMode::uniform};
};

struct MetricsConfig {
  bool mpjpe = true;
  bool p_mpjpe = true;
  bool procrustes_scale = false;
};

struct OutputConfig {
  std::string dir = "out";
  bool plots = true;
  bool images = false;
  int image_frames = 2;  // per view, when images are enabled
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  RigConfig rig;
  SkeletonConfig skeleton;
  MotionConfig motion;
  CorruptionConfig corruption;
  EstimatorConfig estimator;
  MetricsConfig metrics;
  OutputConfig output;
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::string& path,
                                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end())
      throw ValidationError("unknown key '" +
                            (path.empty() ? key : path + "." + key) + "'");
  }
}

template <typename T>
T config_get(const json& obj, const std::string& key, const std::string& path,
             T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(path + "." + key + ": wrong type");
  }
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
}

}  // namespace detail

// --------------------------------------------------------------------------
// Parsing (strict, defaults filled)
// --------------------------------------------------------------------------

inline ExperimentConfig parse_config(const json& root) {
  detail::require_object(root, "config");
  detail::reject_unknown_keys(
      root, "",
      {"schema_version", "seed", "rig", "skeleton", "motion", "corruption",
       "estimator", "metrics", "output"});

  const int version =
      detail::config_get<int>(root, "schema_version", "config",
                              kConfigSchemaVersion);
  if (version != kConfigSchemaVersion)
    throw ValidationError("schema_version: expected " +
                          std::to_string(kConfigSchemaVersion) + ", got " +
                          std::to_string(version));

  ExperimentConfig cfg;
  cfg.seed = detail::config_get<std::uint64_t>(root, "seed", "config", 1);

  if (const auto it = root.find("rig"); it != root.end()) {
    const json& j = *it;
    detail::require_object(j, "rig");
    detail::reject_unknown_keys(j, "rig",
                                {"preset", "views", "radius_mm", "height_mm",
                                 "fx", "fy", "width", "height", "target",
                                 "cameras"});
    cfg.rig.preset =
        detail::config_get<std::string>(j, "preset", "rig", "circular");
    if (cfg.rig.preset != "circular" && cfg.rig.preset != "explicit")
      throw ValidationError("rig.preset: expected 'circular' or 'explicit'");
    if (cfg.rig.preset == "explicit") {
      const json& cams = jsonio::require(j, "cameras", "rig");
      if (!cams.is_array() || cams.empty())
        throw ValidationError("rig.cameras: expected a non-empty array");
      for (std::size_t i = 0; i < cams.size(); ++i)
        cfg.rig.cameras.push_back(jsonio::camera_from_json(
            cams[i], "rig.cameras[" + std::to_string(i) + "]"));
      cfg.rig.views = static_cast<int>(cfg.rig.cameras.size());
    } else {
      if (j.contains("cameras"))
        throw ValidationError(
            "rig.cameras: only valid with preset 'explicit'");
      cfg.rig.views = detail::config_get<int>(j, "views", "rig", 4);
      cfg.rig.radius_mm =
          detail::config_get<double>(j, "radius_mm", "rig", 3000.0);
      cfg.rig.height_mm =
          detail::config_get<double>(j, "height_mm", "rig", 1600.0);
      cfg.rig.fx = detail::config_get<double>(j, "fx", "rig", 1100.0);
      cfg.rig.fy = detail::config_get<double>(j, "fy", "rig", 1100.0);
      cfg.rig.width = detail::config_get<int>(j, "width", "rig", 1024);
      cfg.rig.height = detail::config_get<int>(j, "height", "rig", 1024);
      if (const auto target = j.find("target"); target != j.end()) {
        if (!target->is_array() || target->size() != 3)
          throw ValidationError("rig.target: expected 3 numbers");
        for (int i = 0; i < 3; ++i)
          cfg.rig.target(i) =
              (*target)[static_cast<std::size_t>(i)].get<double>();
      }
      if (cfg.rig.views < 1)
        throw ValidationError("rig.views: must be >= 1");
      if (!(cfg.rig.radius_mm > 0.0))
        throw ValidationError("rig.radius_mm: must be > 0");
      if (!(cfg.rig.fx > 0.0) || !(cfg.rig.fy > 0.0))
        throw ValidationError("rig.fx/fy: must be > 0");
      if (cfg.rig.width < 1 || cfg.rig.height < 1)
        throw ValidationError("rig.width/height: must be >= 1");
    }
  }

  if (const auto it = root.find("skeleton"); it != root.end()) {
    const json& j = *it;
    detail::require_object(j, "skeleton");
    detail::reject_unknown_keys(j, "skeleton",
                                {"model", "scale", "joints", "segment_mm"});
    cfg.skeleton.model =
        detail::config_get<std::string>(j, "model", "skeleton", "human17");
    if (cfg.skeleton.model != "human17" && cfg.skeleton.model != "chain")
      throw ValidationError("skeleton.model: expected 'human17' or 'chain'");
    cfg.skeleton.scale =
        detail::config_get<double>(j, "scale", "skeleton", 1.0);
    cfg.skeleton.joints = detail::config_get<int>(j, "joints", "skeleton", 17);
    cfg.skeleton.segment_mm =
        detail::config_get<double>(j, "segment_mm", "skeleton", 250.0);
    if (!(cfg.skeleton.scale > 0.0))
      throw ValidationError("skeleton.scale: must be > 0");
    if (cfg.skeleton.model == "chain" && cfg.skeleton.joints < 2)
      throw ValidationError("skeleton.joints: chain needs >= 2 joints");
    if (cfg.skeleton.model == "human17" && cfg.skeleton.joints != 17)
      throw ValidationError("skeleton.joints: human17 has exactly 17 joints");
    if (!(cfg.skeleton.segment_mm > 0.0))
      throw ValidationError("skeleton.segment_mm: must be > 0");
  }

  if (const auto it = root.find("motion"); it != root.end()) {
    const json& j = *it;
    detail::require_object(j, "motion");
    detail::reject_unknown_keys(j, "motion",
                                {"actions", "frames", "frame_rate"});
    if (const auto actions = j.find("actions"); actions != j.end()) {
      if (!actions->is_array() || actions->empty())
        throw ValidationError("motion.actions: expected a non-empty array");
      cfg.motion.actions.clear();
      for (const json& name : *actions) {
        try {
          cfg.motion.actions.push_back(parse_action(name.get<std::string>()));
        } catch (const ValidationError& e) {
          throw ValidationError("motion.actions: " + std::string(e.what()));
        }
      }
      for (std::size_t a = 0; a < cfg.motion.actions.size(); ++a)
        for (std::size_t b = a + 1; b < cfg.motion.actions.size(); ++b)
          if (cfg.motion.actions[a] == cfg.motion.actions[b])
            throw ValidationError("motion.actions: duplicate action '" +
                                  std::string(to_string(
                                      cfg.motion.actions[a])) + "'");
    }
    cfg.motion.frames = detail::config_get<int>(j, "frames", "motion", 100);
    cfg.motion.frame_rate =
        detail::config_get<double>(j, "frame_rate", "motion", 50.0);
    if (cfg.motion.frames < 1)
      throw ValidationError("motion.frames: must be >= 1");
    if (!(cfg.motion.frame_rate > 0.0))
      throw ValidationError("motion.frame_rate: must be > 0");
  }

  if (const auto it = root.find("corruption"); it != root.end()) {
    const json& j = *it;
    detail::require_object(j, "corruption");
    detail::reject_unknown_keys(
        j, "corruption",
        {"enabled", "mode", "observation_sigma_px", "noise_sigma_px",
         "missing_dropout", "occlusion_dropout", "occlusion_degree"});
    cfg.corruption.enabled =
        detail::config_get<bool>(j, "enabled", "corruption", false);
    if (const auto mode = j.find("mode"); mode != j.end()) {
      try {
        cfg.corruption.mode = parse_deficiency_mode(mode->get<std::string>());
      } catch (const ValidationError& e) {
        throw ValidationError("corruption.mode: " + std::string(e.what()));
      }
    }
    cfg.corruption.observation_sigma_px = detail::config_get<double>(
        j, "observation_sigma_px", "corruption", 0.5);
    cfg.corruption.severity.noise_sigma_px =
        detail::config_get<double>(j, "noise_sigma_px", "corruption", 20.0);
    cfg.corruption.severity.missing_dropout =
        detail::config_get<double>(j, "missing_dropout", "corruption", 0.8);
    cfg.corruption.severity.occlusion_dropout =
        detail::config_get<double>(j, "occlusion_dropout", "corruption", 0.5);
    cfg.corruption.occlusion_degree =
        detail::config_get<double>(j, "occlusion_degree", "corruption", 0.5);
    if (!(cfg.corruption.observation_sigma_px >= 0.0))
      throw ValidationError("corruption.observation_sigma_px: must be >= 0");
    if (!(cfg.corruption.severity.noise_sigma_px >= 0.0))
      throw ValidationError("corruption.noise_sigma_px: must be >= 0");
    if (!(cfg.corruption.severity.missing_dropout >= 0.0) ||
        !(cfg.corruption.severity.missing_dropout <= 1.0))
      throw ValidationError("corruption.missing_dropout: outside [0, 1]");
    if (!(cfg.corruption.severity.occlusion_dropout >= 0.0) ||
        !(cfg.corruption.severity.occlusion_dropout <= 1.0))
      throw ValidationError("corruption.occlusion_dropout: outside [0, 1]");
    if (!(cfg.corruption.occlusion_degree >= 0.0) ||
        !(cfg.corruption.occlusion_degree <= kMaxOcclusionDegree))
      throw ValidationError("corruption.occlusion_degree: outside [0, " +
                            to_fixed(kMaxOcclusionDegree, 1) + "]");
  }

  if (const auto it = root.find("estimator"); it != root.end()) {
    const json& j = *it;
    detail::require_object(j, "estimator");
    detail::reject_unknown_keys(
        j, "estimator",
        {"scheme", "weighting", "epsilon", "reduction", "fusion_modes"});
    try {
      if (const auto v = j.find("scheme"); v != j.end())
        cfg.estimator.scheme = parse_candidate_scheme(v->get<std::string>());
      if (const auto v = j.find("weighting"); v != j.end())
        cfg.estimator.weighting = parse_estimate_mode(v->get<std::string>());
      if (const auto v = j.find("reduction"); v != j.end())
        cfg.estimator.reduction = parse_reduction(v->get<std::string>());
    } catch (const ValidationError& e) {
      throw ValidationError("estimator: " + std::string(e.what()));
    }
    cfg.estimator.epsilon =
        detail::config_get<double>(j, "epsilon", "estimator", 1e-6);
    if (!(cfg.estimator.epsilon > 0.0))
      throw ValidationError("estimator.epsilon: must be > 0");
    if (const auto modes = j.find("fusion_modes"); modes != j.end()) {
      if (!modes->is_array() || modes->empty())
        throw ValidationError(
            "estimator.fusion_modes: expected a non-empty array");
      cfg.estimator.fusion_modes.clear();
      for (const json& name : *modes) {
        try {
          cfg.estimator.fusion_modes.push_back(
              parse_fusion_mode(name.get<std::string>()));
        } catch (const ValidationError& e) {
          throw ValidationError("estimator.fusion_modes: " +
                                std::string(e.what()));
        }
      }
      for (std::size_t a = 0; a < cfg.estimator.fusion_modes.size(); ++a)
        for (std::size_t b = a + 1; b < cfg.estimator.fusion_modes.size(); ++b)
          if (cfg.estimator.fusion_modes[a] == cfg.estimator.fusion_modes[b])
            throw ValidationError("estimator.fusion_modes: duplicate mode '" +
                                  std::string(to_string(
                                      cfg.estimator.fusion_modes[a])) + "'");
    }
  }

  if (const auto it = root.find("metrics"); it != root.end()) {
    const json& j = *it;
    detail::require_object(j, "metrics");
    detail::reject_unknown_keys(j, "metrics",
                                {"mpjpe", "p_mpjpe", "procrustes_scale"});
    cfg.metrics.mpjpe = detail::config_get<bool>(j, "mpjpe", "metrics", true);
    cfg.metrics.p_mpjpe =
        detail::config_get<bool>(j, "p_mpjpe", "metrics", true);
    cfg.metrics.procrustes_scale =
        detail::config_get<bool>(j, "procrustes_scale", "metrics", false);
    if (!cfg.metrics.mpjpe)
      throw ValidationError("metrics.mpjpe: the primary metric cannot be "
                            "disabled");
  }

  if (const auto it = root.find("output"); it != root.end()) {
    const json& j = *it;
    detail::require_object(j, "output");
    detail::reject_unknown_keys(j, "output",
                                {"dir", "plots", "images", "image_frames"});
    cfg.output.dir = detail::config_get<std::string>(j, "dir", "output", "out");
    cfg.output.plots = detail::config_get<bool>(j, "plots", "output", true);
    cfg.output.images =
        detail::config_get<bool>(j, "images", "output", false);
    cfg.output.image_frames =
        detail::config_get<int>(j, "image_frames", "output", 2);
    if (cfg.output.dir.empty())
      throw ValidationError("output.dir: must be non-empty");
    if (cfg.output.image_frames < 1)
      throw ValidationError("output.image_frames: must be >= 1");
  }

  return cfg;
}

// --------------------------------------------------------------------------
// Canonical echo and file IO
// --------------------------------------------------------------------------

// The canonical JSON form: every field explicit, fixed key order. Saving
// and re-loading this form is byte-stable.
inline json config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["schema_version"] = kConfigSchemaVersion;
  root["seed"] = cfg.seed;

  json rig;
  rig["preset"] = cfg.rig.preset;
  if (cfg.rig.preset == "explicit") {
    json cams = json::array();
    for (const CameraParams& cam : cfg.rig.cameras)
      cams.push_back(jsonio::camera_to_json(cam));
    rig["cameras"] = std::move(cams);
  } else {
    rig["views"] = cfg.rig.views;
    rig["radius_mm"] = cfg.rig.radius_mm;
    rig["height_mm"] = cfg.rig.height_mm;
    rig["fx"] = cfg.rig.fx;
    rig["fy"] = cfg.rig.fy;
    rig["width"] = cfg.rig.width;
    rig["height"] = cfg.rig.height;
    rig["target"] = {cfg.rig.target(0), cfg.rig.target(1), cfg.rig.target(2)};
  }
  root["rig"] = std::move(rig);

  json skeleton;
  skeleton["model"] = cfg.skeleton.model;
  if (cfg.skeleton.model == "chain") {
    skeleton["joints"] = cfg.skeleton.joints;
    skeleton["segment_mm"] = cfg.skeleton.segment_mm;
  } else {
    skeleton["scale"] = cfg.skeleton.scale;
  }
  root["skeleton"] = std::move(skeleton);

  json motion;
  json actions = json::array();
  for (const ActionPreset a : cfg.motion.actions)
    actions.push_back(to_string(a));
  motion["actions"] = std::move(actions);
  motion["frames"] = cfg.motion.frames;
  motion["frame_rate"] = cfg.motion.frame_rate;
  root["motion"] = std::move(motion);

  json corruption;
  corruption["enabled"] = cfg.corruption.enabled;
  corruption["mode"] = to_string(cfg.corruption.mode);
  corruption["observation_sigma_px"] = cfg.corruption.observation_sigma_px;
  corruption["noise_sigma_px"] = cfg.corruption.severity.noise_sigma_px;
  corruption["missing_dropout"] = cfg.corruption.severity.missing_dropout;
  corruption["occlusion_dropout"] = cfg.corruption.severity.occlusion_dropout;
  corruption["occlusion_degree"] = cfg.corruption.occlusion_degree;
  root["corruption"] = std::move(corruption);

  json estimator;
  estimator["scheme"] = to_string(cfg.estimator.scheme);
  estimator["weighting"] = to_string(cfg.estimator.weighting);
  estimator["epsilon"] = cfg.estimator.epsilon;
  estimator["reduction"] = to_string(cfg.estimator.reduction);
  json modes = json::array();
  for (const FusionMode m : cfg.estimator.fusion_modes)
    modes.push_back(to_string(m));
  estimator["fusion_modes"] = std::move(modes);
  root["estimator"] = std::move(estimator);

  json metrics;
  metrics["mpjpe"] = cfg.metrics.mpjpe;
  metrics["p_mpjpe"] = cfg.metrics.p_mpjpe;
  metrics["procrustes_scale"] = cfg.metrics.procrustes_scale;
  root["metrics"] = std::move(metrics);

  json output;
  output["dir"] = cfg.output.dir;
  output["plots"] = cfg.output.plots;
  output["images"] = cfg.output.images;
  output["image_frames"] = cfg.output.image_frames;
  root["output"] = std::move(output);

  return root;
}

inline std::string config_bytes(const ExperimentConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

inline ExperimentConfig load_config(const std::string& path) {
  const std::string text = jsonio::read_text_file(path);
  json root;
  try {
    root = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " +
                          e.what());
  }
  return parse_config(root);
}

inline void save_config(const ExperimentConfig& cfg, const std::string& path) {
  jsonio::write_text_file(path, config_bytes(cfg));
}

// Instantiates the configured camera rig.
inline std::vector<CameraParams> build_rig(const RigConfig& rig) {
  if (rig.preset == "explicit") return rig.cameras;
  return circular_rig(rig.views, rig.radius_mm, rig.height_mm, rig.target,
                      rig.fx, rig.fy, rig.width, rig.height);
}

// Instantiates the configured skeleton.
inline SkeletonModel build_skeleton(const SkeletonConfig& skeleton) {
  if (skeleton.model == "chain")
    return SkeletonModel::chain(skeleton.joints, skeleton.segment_mm);
  return SkeletonModel::human17(skeleton.scale);
}

}  // namespace depropose
