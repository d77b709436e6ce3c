// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "depropose/common.hpp"

namespace depropose {

// 8-bit raster, row-major, channels interleaved. The canvas all corruption
// formulas operate on bit-exactly.
struct PixelGrid {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 (grayscale) or 3 (rgb)
  std::vector<std::uint8_t> data;

  static PixelGrid filled(int width, int height, int channels,
                          std::uint8_t value) {
    if (width <= 0 || height <= 0)
      throw ValidationError("PixelGrid: size must be positive");
    if (channels != 1 && channels != 3)
      throw ValidationError("PixelGrid: channels must be 1 or 3");
    PixelGrid g;
    g.width = width;
    g.height = height;
    g.channels = channels;
    g.data.assign(static_cast<std::size_t>(width) * height * channels, value);
    return g;
  }

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
  bool same_shape(const PixelGrid& other) const {
    return width == other.width && height == other.height &&
           channels == other.channels;
  }
};

inline void validate_grid(const PixelGrid& g) {
  if (g.width <= 0 || g.height <= 0)
    throw ValidationError("PixelGrid: size must be positive");
  if (g.channels != 1 && g.channels != 3)
    throw ValidationError("PixelGrid: channels must be 1 or 3");
  if (g.data.size() !=
      static_cast<std::size_t>(g.width) * g.height * g.channels)
    throw ValidationError("PixelGrid: data length does not match W*H*C");
}

// Boolean occupancy grid (missing-pixel masks, occluder coverage).
struct BoolGrid {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;  // 0 or 1

  static BoolGrid filled(int width, int height, bool value) {
    if (width <= 0 || height <= 0)
      throw ValidationError("BoolGrid: size must be positive");
    BoolGrid g;
    g.width = width;
    g.height = height;
    g.cells.assign(static_cast<std::size_t>(width) * height, value ? 1 : 0);
    return g;
  }

  bool test(int x, int y) const {
    return cells[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool value) {
    cells[static_cast<std::size_t>(y) * width + x] = value ? 1 : 0;
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (const std::uint8_t c : cells) n += c;
    return n;
  }
};

// --------------------------------------------------------------------------
// Binary PNM io: P5 (PGM) for one channel, P6 (PPM) for three.
// --------------------------------------------------------------------------

inline std::string pnm_bytes(const PixelGrid& g) {
  validate_grid(g);
  std::string out = g.channels == 1 ? "P5" : "P6";
  out += '\n';
  out += std::to_string(g.width) + " " + std::to_string(g.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(g.data.data()), g.data.size());
  return out;
}

inline void write_pnm(const PixelGrid& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::string bytes = pnm_bytes(g);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed to write " + path.string());
}

namespace detail {

// Reads one whitespace-delimited PNM header token, skipping '#' comments.
inline std::string pnm_token(std::istream& in) {
  std::string token;
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  while (ch != EOF && !std::isspace(ch)) {
    token.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  return token;
}

}  // namespace detail

inline PixelGrid read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string magic = detail::pnm_token(in);
  int channels = 0;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    throw ValidationError(path.string() + ": not a binary PGM/PPM file");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(detail::pnm_token(in));
    height = std::stoi(detail::pnm_token(in));
    maxval = std::stoi(detail::pnm_token(in));
  } catch (const std::exception&) {
    throw ValidationError(path.string() + ": malformed PNM header");
  }
  if (width <= 0 || height <= 0)
    throw ValidationError(path.string() + ": non-positive PNM size");
  if (maxval != 255)
    throw ValidationError(path.string() + ": only maxval 255 is supported");
  PixelGrid g = PixelGrid::filled(width, height, channels, 0);
  in.read(reinterpret_cast<char*>(g.data.data()),
          static_cast<std::streamsize>(g.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(g.data.size()))
    throw ValidationError(path.string() + ": truncated PNM payload");
  return g;
}

}  // namespace depropose
