// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: generate synthetic multi-view datasets, corrupt
// them, run paired fusion evaluations, summarize reports, and demo the
// adaptive weighting. Exit codes: 0 success, 1 runtime error, 2 usage.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "depropose/config.hpp"
#include "depropose/corruption.hpp"
#include "depropose/dataset.hpp"
#include "depropose/experiment.hpp"
#include "depropose/image.hpp"
#include "depropose/multiview.hpp"
#include "depropose/skeleton.hpp"
#include "depropose/version.hpp"

namespace fs = std::filesystem;
using namespace depropose;

namespace {

std::string version_line() {
  return std::string("depropose ") + kToolkitVersion + " (config schema " +
         std::to_string(kConfigSchemaVersion) + ", dataset schema " +
         std::to_string(kDatasetSchemaVersion) + ", report schema " +
         std::to_string(kReportSchemaVersion) + ")";
}

ExperimentConfig resolve_config(const std::string& config_path,
                                bool seed_given, std::uint64_t seed) {
  ExperimentConfig cfg = config_path.empty() ? parse_config(json::object())
                                             : load_config(config_path);
  if (seed_given) cfg.seed = seed;
  return cfg;
}

// Clean dataset straight from the config: every configured action rendered
// against the configured rig.
Dataset generate_dataset(const ExperimentConfig& cfg) {
  const std::vector<CameraParams> rig = build_rig(cfg.rig);
  const SkeletonModel model = build_skeleton(cfg.skeleton);
  Dataset dataset;
  dataset.cameras = rig;
  dataset.description = "generated by depropose " +
                        std::string(kToolkitVersion);
  for (std::size_t s = 0; s < cfg.motion.actions.size(); ++s) {
    const std::uint64_t seq_seed =
        derive_seed(cfg.seed, RngStage::experiment, s);
    const MotionSequence motion =
        generate_motion(model, cfg.motion.actions[s], cfg.motion.frames,
                        seq_seed, cfg.motion.frame_rate);
    dataset.sequences.push_back(render_observations(
        motion, rig, cfg.corruption.observation_sigma_px, seq_seed));
  }
  return dataset;
}

// Bounding box of the visible joints, padded and clipped to the image.
bool joint_bbox(const Pose2D& obs, int width, int height, PixelBox* box) {
  double min_u = 0.0, min_v = 0.0, max_u = 0.0, max_v = 0.0;
  bool any = false;
  for (int j = 0; j < obs.joint_count(); ++j) {
    if (!obs.visibility[static_cast<std::size_t>(j)]) continue;
    const double u = obs.joints(j, 0), v = obs.joints(j, 1);
    if (!any) {
      min_u = max_u = u;
      min_v = max_v = v;
      any = true;
    }
    min_u = std::min(min_u, u);
    max_u = std::max(max_u, u);
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
  }
  if (!any) return false;
  const int margin = 20;
  const int x0 = std::max(0, static_cast<int>(min_u) - margin);
  const int y0 = std::max(0, static_cast<int>(min_v) - margin);
  const int x1 = std::min(width - 1, static_cast<int>(max_u) + margin);
  const int y1 = std::min(height - 1, static_cast<int>(max_v) + margin);
  if (x1 < x0 || y1 < y0) return false;
  *box = PixelBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  return true;
}

// The image-space counterpart of one view's keypoint degradation, for the
// demo rasters written by `corrupt`.
PixelGrid corrupt_raster(const PixelGrid& raster, const Pose2D& clean_obs,
                         DeficiencyKind kind, const CorruptionConfig& plan,
                         std::uint64_t cell_seed) {
  switch (kind) {
    case DeficiencyKind::gaussian:
      return gaussian_noise(raster, plan.severity.noise_sigma_px, cell_seed);
    case DeficiencyKind::salt_pepper:
      return salt_pepper(
          raster, std::min(1.0, plan.severity.noise_sigma_px / 100.0),
          cell_seed);
    case DeficiencyKind::speckle:
      return speckle(raster, plan.severity.noise_sigma_px / 100.0, cell_seed);
    case DeficiencyKind::missing:
      return missing_blocks(raster, 8, {16, 48}, cell_seed).image;
    case DeficiencyKind::occlusion: {
      PixelBox box;
      if (!joint_bbox(clean_obs, raster.width, raster.height, &box))
        return raster;
      return occlude(raster, procedural_occluders(cell_seed),
                     plan.occlusion_degree, box, cell_seed)
          .image;
    }
    case DeficiencyKind::clean: return raster;
  }
  return raster;
}

int cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir) {
  const Dataset dataset = generate_dataset(cfg);
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "dataset.json").string();
  save_dataset(dataset, path);
  long frames = 0;
  for (const MultiViewSequence& mvs : dataset.sequences)
    frames += mvs.frame_count();
  std::cout << "wrote " << path << " (" << dataset.sequences.size()
            << " sequence(s), " << dataset.cameras.size() << " views, "
            << frames << " frames)\n";
  return 0;
}

int cmd_corrupt(const ExperimentConfig& cfg, const std::string& in_path,
                const std::string& out_dir) {
  const Dataset clean = load_dataset(in_path);
  const SkeletonModel model = build_skeleton(cfg.skeleton);
  Dataset corrupted = clean;
  corrupted.description = clean.description + "; corrupted mode " +
                          to_string(cfg.corruption.mode);
  fs::create_directories(out_dir);

  for (std::size_t s = 0; s < corrupted.sequences.size(); ++s) {
    const std::uint64_t seq_seed =
        derive_seed(cfg.seed, RngStage::experiment, s);
    const std::vector<DeficiencyKind> assignment = assign_deficiency(
        static_cast<int>(clean.cameras.size()), cfg.corruption.mode,
        seq_seed);
    corrupted.sequences[s] = degrade_observations(
        clean.sequences[s], assignment, cfg.corruption.severity, seq_seed);

    if (cfg.output.images) {
      const MultiViewSequence& source = clean.sequences[s];
      const int image_frames =
          std::min(cfg.output.image_frames, source.frame_count());
      for (std::size_t v = 0; v < assignment.size(); ++v) {
        if (assignment[v] == DeficiencyKind::clean) continue;
        const CameraParams& cam = clean.cameras[v];
        for (int t = 0; t < image_frames; ++t) {
          const Pose2D& obs = source.observations[v][static_cast<
              std::size_t>(t)];
          const PixelGrid raster =
              rasterize_view(obs, model, cam.width, cam.height);
          const std::uint64_t cell_seed =
              is_noise_kind(assignment[v])
                  ? derive_seed(seq_seed, RngStage::image_noise, v,
                                static_cast<std::uint64_t>(t))
                  : derive_seed(seq_seed, RngStage::occluder, v,
                                static_cast<std::uint64_t>(t));
          const PixelGrid demo = corrupt_raster(
              raster, obs, assignment[v], cfg.corruption, cell_seed);
          char name[96];
          std::snprintf(name, sizeof(name),
                        "images/seq%zu_view%d_frame%04d_%s.pgm", s,
                        source.view_ids[v], t, to_string(assignment[v]));
          const fs::path path = fs::path(out_dir) / name;
          fs::create_directories(path.parent_path());
          write_pnm(demo, path);
        }
      }
    }
  }

  const std::string path = (fs::path(out_dir) / "dataset.json").string();
  save_dataset(corrupted, path);
  std::cout << "wrote " << path << " (mode " << to_string(cfg.corruption.mode)
            << ")\n";
  return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg, const std::string& out_dir) {
  const RunOutput output = run_experiment(cfg);
  write_outputs(output, out_dir);
  std::cout << "wrote " << (fs::path(out_dir) / "report.json").string()
            << " and report.csv";
  if (!output.plots.empty()) std::cout << " (+" << output.plots.size()
                                       << " plot(s))";
  if (!output.images.empty()) std::cout << " (+" << output.images.size()
                                        << " image(s))";
  char timing[64];
  std::snprintf(timing, sizeof(timing), "; wall clock %.3f s",
                output.report.wall_clock_seconds);
  std::cout << timing << "\n";
  for (const ModeResult& mode : output.report.modes) {
    char line[128];
    std::snprintf(line, sizeof(line),
                  "  %-8s MPJPE %10.4f mm   P-MPJPE %10.4f mm   (%ld frames)",
                  to_string(mode.fusion), mode.metrics.overall.mpjpe_mm,
                  mode.metrics.overall.p_mpjpe_mm,
                  mode.metrics.overall.frames);
    std::cout << line << "\n";
  }
  return 0;
}

int cmd_report(const std::string& in_path) {
  json root;
  try {
    root = json::parse(jsonio::read_text_file(in_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("report '" + in_path + "' is not valid JSON: " + e.what());
  }
  std::cout << "toolkit " << root.value("toolkit_version", "?") << ", report schema "
            << root.value("schema_version", -1) << "\n";
  if (root.contains("deficiency_summary")) {
    std::cout << "assignments:\n";
    for (const json& seq : root["deficiency_summary"]["sequences"]) {
      std::cout << "  " << seq.value("action", "?") << ":";
      for (const json& kind : seq["assignment"])
        std::cout << " " << kind.get<std::string>();
      std::cout << "\n";
    }
  }
  char header[96];
  std::snprintf(header, sizeof(header), "%-10s %-8s %12s %12s %8s", "mode",
                "action", "mpjpe(mm)", "p-mpjpe(mm)", "frames");
  std::cout << header << "\n";
  for (const json& mode : root["modes"]) {
    const std::string name = mode.value("fusion", "?");
    json rows = mode["metrics"]["actions"];
    rows.push_back(mode["metrics"]["overall"]);
    for (const json& row : rows) {
      char line[96];
      std::snprintf(line, sizeof(line), "%-10s %-8s %12.4f %12.4f %8ld",
                    name.c_str(), row.value("action", "?").c_str(),
                    row.value("mpjpe", 0.0), row.value("p_mpjpe", 0.0),
                    row.value("frames", 0L));
      std::cout << line << "\n";
    }
  }
  return 0;
}

int cmd_demo_fusion(int views, int noisy_view, double sigma,
                    std::uint64_t seed) {
  if (views < 2) throw ValidationError("demo-fusion: need at least 2 views");
  if (noisy_view < 0 || noisy_view >= views)
    throw ValidationError("demo-fusion: --noisy-view out of range");
  if (!(sigma >= 0.0))
    throw ValidationError("demo-fusion: --sigma must be >= 0");

  const SkeletonModel model = SkeletonModel::human17();
  const std::uint64_t seq_seed = derive_seed(seed, RngStage::experiment, 0);
  const MotionSequence motion =
      generate_motion(model, ActionPreset::walk, 20, seq_seed);
  const std::vector<CameraParams> rig = circular_rig(
      views, 3000.0, 1600.0, Vector3(0.0, 0.0, 1000.0), 1100.0, 1100.0, 1024,
      1024);
  MultiViewSequence mvs = render_observations(motion, rig, 0.5, seq_seed);
  std::vector<DeficiencyKind> assignment(static_cast<std::size_t>(views),
                                         DeficiencyKind::clean);
  assignment[static_cast<std::size_t>(noisy_view)] = DeficiencyKind::gaussian;
  DegradeSeverity severity;
  severity.noise_sigma_px = sigma;
  mvs = degrade_observations(mvs, assignment, severity, seq_seed);

  const std::vector<FrameEstimate> estimates =
      adaptive_estimate(mvs, rig, AdaptiveOptions{});
  std::vector<double> mean(static_cast<std::size_t>(views), 0.0);
  for (const FrameEstimate& est : estimates)
    for (std::size_t v = 0; v < mean.size(); ++v)
      mean[v] += est.weights.omega[v];
  double sum = 0.0;
  for (double& m : mean) {
    m /= static_cast<double>(estimates.size());
    sum += m;
  }

  std::cout << "adaptive weights over " << estimates.size()
            << " frames (view " << noisy_view << " degraded, sigma " << sigma
            << " px):\n";
  for (std::size_t v = 0; v < mean.size(); ++v) {
    char line[96];
    std::snprintf(line, sizeof(line), "  view %zu: mean weight %.6f%s", v,
                  mean[v],
                  static_cast<int>(v) == noisy_view ? "  <- degraded" : "");
    std::cout << line << "\n";
  }
  std::cout << "sum of mean weights: " << to_fixed(sum, 6) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deficiency-aware multi-view 3D pose toolkit"};
  app.set_version_flag("--version", version_line());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string in_path;
  std::uint64_t seed = 0;
  bool seed_given = false;

  const auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--config", config_path, "experiment config JSON");
    cmd->add_option("--seed", seed, "override the config's master seed")
        ->each([&](const std::string&) { seed_given = true; });
    if (with_out)
      cmd->add_option("--out", out_dir, "output directory")
          ->capture_default_str();
  };

  CLI::App* generate =
      app.add_subcommand("generate", "render a clean synthetic dataset");
  add_common(generate, true);

  CLI::App* corrupt = app.add_subcommand(
      "corrupt", "apply the deficiency protocol to a saved dataset");
  add_common(corrupt, true);
  corrupt->add_option("--in", in_path, "input dataset.json")->required();

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "run the paired fusion evaluation and write reports");
  add_common(evaluate, true);

  CLI::App* report =
      app.add_subcommand("report", "print a saved report.json as a table");
  report->add_option("--in", in_path, "input report.json")->required();

  CLI::App* demo = app.add_subcommand(
      "demo-fusion", "show adaptive weights for one degraded view");
  int views = 4;
  int noisy_view = 0;
  double sigma = 20.0;
  demo->add_option("--views", views, "number of views")
      ->capture_default_str();
  demo->add_option("--noisy-view", noisy_view, "index of the degraded view")
      ->capture_default_str();
  demo->add_option("--sigma", sigma, "pixel noise sigma")
      ->capture_default_str();
  demo->add_option("--seed", seed, "master seed")
      ->each([&](const std::string&) { seed_given = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed())
      return cmd_generate(resolve_config(config_path, seed_given, seed),
                          out_dir);
    if (corrupt->parsed())
      return cmd_corrupt(resolve_config(config_path, seed_given, seed),
                         in_path, out_dir);
    if (evaluate->parsed()) {
      ExperimentConfig cfg = resolve_config(config_path, seed_given, seed);
      if (evaluate->count("--out") == 0 && !cfg.output.dir.empty())
        out_dir = cfg.output.dir;
      return cmd_evaluate(cfg, out_dir);
    }
    if (report->parsed()) return cmd_report(in_path);
    if (demo->parsed())
      return cmd_demo_fusion(views, noisy_view, sigma,
                             seed_given ? seed : 7);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable with require_subcommand(1)
}
