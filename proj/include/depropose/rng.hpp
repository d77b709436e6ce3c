// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace depropose {

// Pipeline stages draw randomness from independent streams derived from one
// master seed. Streams are keyed by (stage, a, b, c) — typically stage plus a
// view index and a frame index — so that:
//   * reordering or parallelising loops cannot change what any (view, frame)
//     cell draws, and
//   * any stage can be re-run in isolation and reproduce its exact draws.
enum class RngStage : std::uint64_t {
  motion = 1,       // joint angle phases / amplitude jitter
  observation = 2,  // detector pixel noise, keyed (view, frame)
  assignment = 3,   // which views a corruption mode flags
  degrade = 4,      // keypoint-level corruption, keyed (view, frame)
  image_noise = 5,  // pixel-level corruption of rendered frames
  occluder = 6,     // occluder shape synthesis and placement
  experiment = 7,   // harness-level draws (severity sweeps, sampling)
};

// Fixed 64-bit mix (splitmix64 finaliser). Chosen because it is tiny, fully
// specified here, and diffuses single-bit changes across the whole word, so
// neighbouring (view, frame) keys yield unrelated streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Documented derivation: fold the key fields into the master seed one mix at
// a time. The +1 offsets keep (a=0) distinct from "field absent".
constexpr std::uint64_t derive_seed(std::uint64_t master, RngStage stage,
                                    std::uint64_t a = 0, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
  std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(stage));
  h = mix64(h ^ (a + 1));
  h = mix64(h ^ (b + 1));
  h = mix64(h ^ (c + 1));
  return h;
}

// Engine for one derived stream. Distribution classes from <random> are used
// on top of this; their sequences are implementation-pinned per binary, which
// is sufficient for the reproducibility contract (same build, same bytes).
inline std::mt19937_64 make_rng(std::uint64_t master, RngStage stage,
                                std::uint64_t a = 0, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
  return std::mt19937_64(derive_seed(master, stage, a, b, c));
}

}  // namespace depropose
