// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared JSON helpers: camera / pose / deficiency-tag encodings used by the
// config, dataset, and report writers. All writers use ordered JSON so the
// emitted bytes are a deterministic function of the data.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "depropose/common.hpp"
#include "depropose/deficiency.hpp"
#include "depropose/geometry.hpp"

namespace depropose {

using json = nlohmann::ordered_json;

namespace jsonio {

// NaN serializes as JSON null (the library's own convention); reading maps
// null back to the NaN sentinel so invisible-joint coordinates round-trip.
inline json from_coord(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

inline double to_coord(const json& j, const std::string& path) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number())
    throw ValidationError(path + ": expected a number or null");
  return j.get<double>();
}

inline const json& require(const json& obj, const std::string& key,
                           const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw ValidationError(path + ": missing required key '" + key + "'");
  return *it;
}

inline json camera_to_json(const CameraParams& cam) {
  json j;
  j["view_id"] = cam.view_id;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  json r = json::array();
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r.push_back(cam.rotation(row, col));
  j["R"] = std::move(r);
  j["t"] = {cam.translation(0), cam.translation(1), cam.translation(2)};
  j["width"] = cam.width;
  j["height"] = cam.height;
  return j;
}

inline CameraParams camera_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "view_id" && key != "fx" && key != "fy" && key != "cx" &&
        key != "cy" && key != "R" && key != "t" && key != "width" &&
        key != "height")
      throw ValidationError("unknown key '" + path + "." + key + "'");
  }
  CameraParams cam;
  cam.view_id = require(j, "view_id", path).get<int>();
  cam.fx = require(j, "fx", path).get<double>();
  cam.fy = require(j, "fy", path).get<double>();
  cam.cx = require(j, "cx", path).get<double>();
  cam.cy = require(j, "cy", path).get<double>();
  const json& r = require(j, "R", path);
  if (!r.is_array() || r.size() != 9)
    throw ValidationError(path + ".R: expected 9 row-major entries");
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      cam.rotation(row, col) = r[static_cast<std::size_t>(3 * row + col)]
                                   .get<double>();
  const json& t = require(j, "t", path);
  if (!t.is_array() || t.size() != 3)
    throw ValidationError(path + ".t: expected 3 entries");
  for (int i = 0; i < 3; ++i)
    cam.translation(i) = t[static_cast<std::size_t>(i)].get<double>();
  cam.width = require(j, "width", path).get<int>();
  cam.height = require(j, "height", path).get<int>();
  try {
    validate_camera(cam);
  } catch (const Error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return cam;
}

inline json tag_to_json(const DeficiencyTag& tag) {
  json j;
  j["kind"] = to_string(tag.kind);
  json params = json::object();
  for (const auto& [name, value] : tag.params) params[name] = value;
  j["params"] = std::move(params);
  return j;
}

inline DeficiencyTag tag_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  DeficiencyTag tag;
  try {
    tag.kind = parse_deficiency_kind(require(j, "kind", path).get<std::string>());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ".kind: " + e.what());
  }
  const json& params = require(j, "params", path);
  if (!params.is_object())
    throw ValidationError(path + ".params: expected an object");
  for (const auto& [name, value] : params.items()) {
    if (!value.is_number())
      throw ValidationError(path + ".params." + name + ": expected a number");
    tag.params[name] = value.get<double>();
  }
  try {
    validate_tag(tag);
  } catch (const Error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return tag;
}

// FNV-1a over the canonical (compact) dump of a document — the integrity
// checksum stored inside dataset files.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (const unsigned char c : bytes) {
    hash ^= static_cast<std::uint64_t>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

inline std::string checksum_string(const std::string& bytes) {
  return "fnv1a64:" + to_hex64(fnv1a64(bytes));
}

inline void write_text_file(const std::string& path,
                            const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace jsonio
}  // namespace depropose
