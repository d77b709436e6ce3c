// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
//
// Dataset files: a versioned, checksummed JSON container for camera rigs
// and multi-view observation sequences. Round trips are lossless — doubles
// are written in shortest round-trip form and NaN sentinels map to null.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "depropose/common.hpp"
#include "depropose/multiview.hpp"
#include "depropose/serialize.hpp"
#include "depropose/version.hpp"

namespace depropose {

// A saved experiment artifact: one rig, any number of observation
// sequences captured with it.
struct Dataset {
  std::vector<CameraParams> cameras;
  std::vector<MultiViewSequence> sequences;
  std::string description;
};

inline void validate_dataset(const Dataset& dataset) {
  if (dataset.cameras.empty())
    throw ValidationError("dataset: no cameras");
  for (const CameraParams& cam : dataset.cameras) validate_camera(cam);
  for (const MultiViewSequence& mvs : dataset.sequences) {
    validate_mvs(mvs);
    if (mvs.view_count() != static_cast<int>(dataset.cameras.size()))
      throw ShapeMismatchError(
          "dataset: sequence '" + mvs.action + "' has " +
          std::to_string(mvs.view_count()) + " views, rig has " +
          std::to_string(dataset.cameras.size()));
  }
}

namespace detail {

inline json sequence_to_json(const MultiViewSequence& mvs) {
  json seq;
  seq["action"] = mvs.action;
  seq["frame_rate"] = mvs.frame_rate;
  json rays = json::array();
  for (const RayEncoding& ray : mvs.rays) {
    json r;
    r["azimuth"] = ray.azimuth;
    r["elevation"] = ray.elevation;
    rays.push_back(std::move(r));
  }
  seq["rays"] = std::move(rays);

  json frames = json::array();
  const int frame_count = mvs.frame_count();
  for (int t = 0; t < frame_count; ++t) {
    json frame;
    frame["t"] = t;
    if (mvs.ground_truth) {
      const Pose3D& gt = mvs.ground_truth->frames[static_cast<std::size_t>(t)];
      json joints = json::array();
      for (int j = 0; j < gt.joint_count(); ++j)
        joints.push_back({gt.joints(j, 0), gt.joints(j, 1), gt.joints(j, 2)});
      frame["joints_3d"] = std::move(joints);
    } else {
      frame["joints_3d"] = nullptr;
    }
    json views = json::array();
    for (int v = 0; v < mvs.view_count(); ++v) {
      const Pose2D& obs =
          mvs.observations[static_cast<std::size_t>(v)][static_cast<
              std::size_t>(t)];
      json view;
      view["view_id"] = mvs.view_ids[static_cast<std::size_t>(v)];
      json joints = json::array();
      json visibility = json::array();
      for (int j = 0; j < obs.joint_count(); ++j) {
        joints.push_back({jsonio::from_coord(obs.joints(j, 0)),
                          jsonio::from_coord(obs.joints(j, 1))});
        visibility.push_back(
            static_cast<bool>(obs.visibility[static_cast<std::size_t>(j)]));
      }
      view["joints_2d"] = std::move(joints);
      view["visibility"] = std::move(visibility);
      view["deficiency"] = jsonio::tag_to_json(
          mvs.deficiency[static_cast<std::size_t>(v)][static_cast<
              std::size_t>(t)]);
      views.push_back(std::move(view));
    }
    frame["views"] = std::move(views);
    frames.push_back(std::move(frame));
  }
  seq["frames"] = std::move(frames);
  return seq;
}

inline MultiViewSequence sequence_from_json(const json& seq,
                                            const std::string& path) {
  if (!seq.is_object()) throw ValidationError(path + ": expected an object");
  MultiViewSequence mvs;
  mvs.action = jsonio::require(seq, "action", path).get<std::string>();
  mvs.frame_rate = jsonio::require(seq, "frame_rate", path).get<double>();
  const json& rays = jsonio::require(seq, "rays", path);
  if (!rays.is_array())
    throw ValidationError(path + ".rays: expected an array");
  for (const json& r : rays) {
    RayEncoding ray;
    ray.azimuth = jsonio::require(r, "azimuth", path + ".rays").get<double>();
    ray.elevation =
        jsonio::require(r, "elevation", path + ".rays").get<double>();
    ray.encoded = {std::sin(ray.azimuth), std::cos(ray.azimuth),
                   std::sin(ray.elevation), std::cos(ray.elevation)};
    mvs.rays.push_back(ray);
  }

  const json& frames = jsonio::require(seq, "frames", path);
  if (!frames.is_array() || frames.empty())
    throw ValidationError(path + ".frames: expected a non-empty array");
  const std::size_t view_count = mvs.rays.size();
  mvs.observations.assign(view_count, {});
  mvs.deficiency.assign(view_count, {});

  MotionSequence gt;
  gt.action_label = mvs.action;
  gt.frame_rate = mvs.frame_rate;
  bool has_gt = false;

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::string frame_path =
        path + ".frames[" + std::to_string(t) + "]";
    const json& frame = frames[t];
    const json& joints_3d = jsonio::require(frame, "joints_3d", frame_path);
    if (!joints_3d.is_null()) {
      if (t == 0) has_gt = true;
      if (!has_gt)
        throw ValidationError(frame_path +
                              ".joints_3d: present in some frames only");
      if (!joints_3d.is_array())
        throw ValidationError(frame_path + ".joints_3d: expected an array");
      Pose3D pose = Pose3D::zeros(static_cast<int>(joints_3d.size()));
      for (std::size_t j = 0; j < joints_3d.size(); ++j) {
        const json& row = joints_3d[j];
        if (!row.is_array() || row.size() != 3)
          throw ValidationError(frame_path + ".joints_3d: expected [x,y,z]");
        for (int c = 0; c < 3; ++c)
          pose.joints(static_cast<Eigen::Index>(j), c) =
              row[static_cast<std::size_t>(c)].get<double>();
      }
      gt.frames.push_back(std::move(pose));
    } else if (has_gt) {
      throw ValidationError(frame_path +
                            ".joints_3d: present in some frames only");
    }

    const json& views = jsonio::require(frame, "views", frame_path);
    if (!views.is_array() || views.size() != view_count)
      throw ValidationError(frame_path + ".views: expected " +
                            std::to_string(view_count) + " entries");
    for (std::size_t v = 0; v < view_count; ++v) {
      const std::string view_path =
          frame_path + ".views[" + std::to_string(v) + "]";
      const json& view = views[v];
      const int view_id =
          jsonio::require(view, "view_id", view_path).get<int>();
      if (t == 0) {
        mvs.view_ids.push_back(view_id);
      } else if (mvs.view_ids[v] != view_id) {
        throw ValidationError(view_path + ".view_id: order changes between "
                              "frames");
      }
      const json& joints_2d = jsonio::require(view, "joints_2d", view_path);
      const json& visibility = jsonio::require(view, "visibility", view_path);
      if (!joints_2d.is_array() || !visibility.is_array() ||
          joints_2d.size() != visibility.size())
        throw ValidationError(view_path +
                              ": joints_2d/visibility shape mismatch");
      Pose2D obs;
      obs.joints.resize(static_cast<Eigen::Index>(joints_2d.size()), 2);
      obs.visibility.resize(visibility.size());
      for (std::size_t j = 0; j < joints_2d.size(); ++j) {
        const json& row = joints_2d[j];
        if (!row.is_array() || row.size() != 2)
          throw ValidationError(view_path + ".joints_2d: expected [u,v]");
        const std::string coord_path = view_path + ".joints_2d";
        obs.joints(static_cast<Eigen::Index>(j), 0) =
            jsonio::to_coord(row[0], coord_path);
        obs.joints(static_cast<Eigen::Index>(j), 1) =
            jsonio::to_coord(row[1], coord_path);
        obs.visibility[j] = visibility[j].get<bool>();
      }
      mvs.observations[v].push_back(std::move(obs));
      mvs.deficiency[v].push_back(jsonio::tag_from_json(
          jsonio::require(view, "deficiency", view_path),
          view_path + ".deficiency"));
    }
  }

  if (has_gt) mvs.ground_truth = std::move(gt);
  validate_mvs(mvs);
  return mvs;
}

}  // namespace detail

// Serialized bytes of a dataset: schema version, meta (with an FNV-1a
// checksum over the canonical document), cameras, sequences.
inline std::string dataset_bytes(const Dataset& dataset) {
  validate_dataset(dataset);
  json root;
  root["schema_version"] = kDatasetSchemaVersion;
  json meta;
  meta["toolkit_version"] = kToolkitVersion;
  meta["description"] = dataset.description;
  root["meta"] = std::move(meta);
  json cameras = json::array();
  for (const CameraParams& cam : dataset.cameras)
    cameras.push_back(jsonio::camera_to_json(cam));
  root["cameras"] = std::move(cameras);
  json sequences = json::array();
  for (const MultiViewSequence& mvs : dataset.sequences)
    sequences.push_back(detail::sequence_to_json(mvs));
  root["sequences"] = std::move(sequences);

  // Checksum covers the compact dump of everything except itself.
  root["meta"]["checksum"] = jsonio::checksum_string(root.dump());
  return root.dump(2) + "\n";
}

inline void save_dataset(const Dataset& dataset, const std::string& path) {
  jsonio::write_text_file(path, dataset_bytes(dataset));
}

// Single-sequence convenience used by the CLI.
inline void save_dataset(const MultiViewSequence& mvs,
                         const std::vector<CameraParams>& cameras,
                         const std::string& path,
                         const std::string& description = "") {
  Dataset dataset;
  dataset.cameras = cameras;
  dataset.sequences.push_back(mvs);
  dataset.description = description;
  save_dataset(dataset, path);
}

inline Dataset parse_dataset(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DatasetIntegrityError(
        std::string("dataset is not valid JSON (truncated or corrupt): ") +
        e.what());
  }
  if (!root.is_object())
    throw DatasetIntegrityError("dataset: expected a JSON object");

  const auto version_it = root.find("schema_version");
  if (version_it == root.end() || !version_it->is_number_integer())
    throw DatasetVersionError("dataset has no schema_version");
  const int version = version_it->get<int>();
  if (version != kDatasetSchemaVersion)
    throw DatasetVersionError(
        "dataset schema_version " + std::to_string(version) +
        " is not supported (expected " +
        std::to_string(kDatasetSchemaVersion) + ")");

  json meta = jsonio::require(root, "meta", "dataset");
  const auto checksum_it = meta.find("checksum");
  if (checksum_it == meta.end())
    throw DatasetIntegrityError("dataset meta has no checksum");
  const std::string stored = checksum_it->get<std::string>();
  json canonical = root;
  canonical["meta"].erase("checksum");
  const std::string recomputed = jsonio::checksum_string(canonical.dump());
  if (stored != recomputed)
    throw DatasetIntegrityError("dataset checksum mismatch: stored " +
                                stored + ", recomputed " + recomputed);

  Dataset dataset;
  dataset.description =
      jsonio::require(meta, "description", "dataset.meta").get<std::string>();
  const json& cameras = jsonio::require(root, "cameras", "dataset");
  if (!cameras.is_array() || cameras.empty())
    throw ValidationError("dataset.cameras: expected a non-empty array");
  for (std::size_t i = 0; i < cameras.size(); ++i)
    dataset.cameras.push_back(jsonio::camera_from_json(
        cameras[i], "dataset.cameras[" + std::to_string(i) + "]"));
  const json& sequences = jsonio::require(root, "sequences", "dataset");
  if (!sequences.is_array())
    throw ValidationError("dataset.sequences: expected an array");
  for (std::size_t s = 0; s < sequences.size(); ++s)
    dataset.sequences.push_back(detail::sequence_from_json(
        sequences[s], "dataset.sequences[" + std::to_string(s) + "]"));
  validate_dataset(dataset);
  return dataset;
}

inline Dataset load_dataset(const std::string& path) {
  return parse_dataset(jsonio::read_text_file(path));
}

}  // namespace depropose
