// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: generate motion → render observations →
// corrupt → estimate under every configured fusion mode → aggregate
// metrics. All fusion modes within one run consume bit-identical corrupted
// observations, so mode comparisons are paired. Reports, plots, and images
// are deterministic byte-for-byte given (config, seed); wall-clock time is
// kept on the side and never serialized.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "depropose/config.hpp"
#include "depropose/corruption.hpp"
#include "depropose/dataset.hpp"
#include "depropose/fusion.hpp"
#include "depropose/image.hpp"
#include "depropose/metrics.hpp"
#include "depropose/multiview.hpp"
#include "depropose/plot.hpp"
#include "depropose/rng.hpp"
#include "depropose/serialize.hpp"
#include "depropose/skeleton.hpp"
#include "depropose/version.hpp"

namespace depropose {

struct WeightStats {
  int view_id = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct ModeResult {
  FusionMode fusion = FusionMode::adaptive;
  MetricReport metrics;
  std::vector<WeightStats> weights;  // per view, over all frames
};

struct SequenceManifest {
  std::string action;
  std::vector<DeficiencyKind> assignment;  // per view
};

struct RunReport {
  ExperimentConfig config;
  std::vector<SequenceManifest> manifest;
  // (view, frame) cell counts by deficiency kind, over all sequences.
  std::array<long, 6> cell_counts{};
  std::vector<ModeResult> modes;
  double wall_clock_seconds = 0.0;  // informational only, not serialized
};

struct RunOutput {
  RunReport report;
  std::vector<std::pair<std::string, PixelGrid>> images;  // rel path, raster
  std::vector<std::pair<std::string, std::string>> plots;  // rel path, svg
};

namespace detail {

inline constexpr std::array<DeficiencyKind, 6> kAllKinds{
    DeficiencyKind::clean,      DeficiencyKind::gaussian,
    DeficiencyKind::salt_pepper, DeficiencyKind::speckle,
    DeficiencyKind::missing,    DeficiencyKind::occlusion};

template <typename Fn>
auto run_stage(const std::string& label, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(label + ": " + e.what());
  }
}

inline AdaptiveOptions estimator_options(const EstimatorConfig& estimator,
                                         FusionMode fusion,
                                         const Vector3& anchor) {
  AdaptiveOptions opt;
  opt.mode = estimator.weighting;
  opt.scheme = estimator.scheme;
  opt.fusion = fusion;
  opt.reduction = estimator.reduction;
  opt.epsilon = estimator.epsilon;
  opt.scene_anchor = anchor;
  return opt;
}

// Mean adaptive weight of the degraded view (and of the remaining clean
// views) as one deficiency kind's severity is swept — the data behind the
// weight-vs-severity plot.
inline std::vector<PlotSeries> weight_severity_sweep(
    const ExperimentConfig& cfg, const SkeletonModel& model,
    const std::vector<CameraParams>& rig) {
  const int frames = std::min(cfg.motion.frames, 40);
  const std::uint64_t sweep_seed =
      derive_seed(cfg.seed, RngStage::experiment, 0, 1);
  const MotionSequence motion =
      generate_motion(model, cfg.motion.actions.front(), frames, sweep_seed,
                      cfg.motion.frame_rate);
  const MultiViewSequence clean = render_observations(
      motion, rig, cfg.corruption.observation_sigma_px, sweep_seed);

  const DeficiencyMode mode = cfg.corruption.mode;
  const DeficiencyKind kind = mode == DeficiencyMode::noise
                                  ? DeficiencyKind::gaussian
                                  : mode == DeficiencyMode::missing
                                        ? DeficiencyKind::missing
                                        : DeficiencyKind::occlusion;
  const std::vector<double> severities =
      mode == DeficiencyMode::noise
          ? std::vector<double>{0.0, 5.0, 10.0, 20.0, 40.0}
          : std::vector<double>{0.0, 0.2, 0.4, 0.6, 0.8};

  // The sweep always degrades view 0; the assignment protocol itself is
  // exercised by the main run.
  std::vector<DeficiencyKind> assignment(rig.size(), DeficiencyKind::clean);
  assignment[0] = kind;

  PlotSeries degraded{"degraded view", {}};
  PlotSeries others{"clean views (mean)", {}};
  for (const double severity_value : severities) {
    DegradeSeverity severity = cfg.corruption.severity;
    if (mode == DeficiencyMode::noise)
      severity.noise_sigma_px = severity_value;
    else if (mode == DeficiencyMode::missing)
      severity.missing_dropout = severity_value;
    else
      severity.occlusion_dropout = severity_value;
    const MultiViewSequence degraded_mvs =
        degrade_observations(clean, assignment, severity, sweep_seed);
    const std::vector<FrameEstimate> estimates = adaptive_estimate(
        degraded_mvs, rig,
        estimator_options(cfg.estimator, FusionMode::adaptive,
                          cfg.rig.target));
    double sum0 = 0.0, sum_rest = 0.0;
    for (const FrameEstimate& est : estimates) {
      sum0 += est.weights.omega[0];
      for (std::size_t v = 1; v < est.weights.omega.size(); ++v)
        sum_rest += est.weights.omega[v];
    }
    const double n = static_cast<double>(estimates.size());
    degraded.points.emplace_back(severity_value, sum0 / n);
    others.points.emplace_back(
        severity_value,
        sum_rest / (n * static_cast<double>(rig.size() - 1)));
  }
  return {degraded, others};
}

}  // namespace detail

// --------------------------------------------------------------------------
// The run itself
// --------------------------------------------------------------------------

inline RunOutput run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();

  const std::vector<CameraParams> rig = detail::run_stage(
      "build rig", [&] { return build_rig(cfg.rig); });
  if (rig.size() < 2)
    throw ValidationError("rig: evaluation needs at least two views");
  const SkeletonModel model = detail::run_stage(
      "build skeleton", [&] { return build_skeleton(cfg.skeleton); });

  RunOutput output;
  output.report.config = cfg;

  // Per-mode frame metrics and weight accumulators, pooled over sequences.
  const std::size_t mode_count = cfg.estimator.fusion_modes.size();
  std::vector<std::vector<FrameMetric>> frame_metrics(mode_count);
  std::vector<std::vector<double>> weight_sum(
      mode_count, std::vector<double>(rig.size(), 0.0));
  std::vector<std::vector<double>> weight_min(
      mode_count, std::vector<double>(rig.size(), 0.0));
  std::vector<std::vector<double>> weight_max(
      mode_count, std::vector<double>(rig.size(), 0.0));
  long total_frames = 0;

  for (std::size_t s = 0; s < cfg.motion.actions.size(); ++s) {
    const ActionPreset action = cfg.motion.actions[s];
    const std::string label = to_string(action);
    const std::uint64_t seq_seed =
        derive_seed(cfg.seed, RngStage::experiment, s);

    const MotionSequence motion = detail::run_stage(
        "generate '" + label + "'", [&] {
          return generate_motion(model, action, cfg.motion.frames, seq_seed,
                                 cfg.motion.frame_rate);
        });
    MultiViewSequence mvs = detail::run_stage(
        "render '" + label + "'", [&] {
          return render_observations(
              motion, rig, cfg.corruption.observation_sigma_px, seq_seed);
        });

    std::vector<DeficiencyKind> assignment(rig.size(),
                                           DeficiencyKind::clean);
    if (cfg.corruption.enabled) {
      assignment = detail::run_stage("assign deficiency '" + label + "'",
                                     [&] {
                                       return assign_deficiency(
                                           static_cast<int>(rig.size()),
                                           cfg.corruption.mode, seq_seed);
                                     });
      mvs = detail::run_stage("degrade '" + label + "'", [&] {
        return degrade_observations(mvs, assignment,
                                    cfg.corruption.severity, seq_seed);
      });
    }
    output.report.manifest.push_back(SequenceManifest{label, assignment});
    for (const auto& view_tags : mvs.deficiency)
      for (const DeficiencyTag& tag : view_tags)
        output.report.cell_counts[static_cast<std::size_t>(tag.kind)] += 1;

    for (std::size_t m = 0; m < mode_count; ++m) {
      const FusionMode mode = cfg.estimator.fusion_modes[m];
      const std::vector<FrameEstimate> estimates = detail::run_stage(
          "estimate '" + label + "' (" + to_string(mode) + ")", [&] {
            return adaptive_estimate(
                mvs, rig,
                detail::estimator_options(cfg.estimator, mode,
                                          cfg.rig.target));
          });
      detail::run_stage(
          "evaluate '" + label + "' (" + std::string(to_string(mode)) + ")",
          [&] {
            for (std::size_t t = 0; t < estimates.size(); ++t) {
              const Pose3D& gt = motion.frames[t];
              FrameMetric metric;
              metric.action = label;
              metric.mpjpe_mm = mpjpe(estimates[t].pose, gt);
              metric.p_mpjpe_mm =
                  cfg.metrics.p_mpjpe
                      ? p_mpjpe(estimates[t].pose, gt,
                                cfg.metrics.procrustes_scale)
                      : 0.0;
              frame_metrics[m].push_back(std::move(metric));
              for (std::size_t v = 0; v < rig.size(); ++v) {
                const double w = estimates[t].weights.omega[v];
                weight_sum[m][v] += w;
                if (total_frames + static_cast<long>(t) == 0) {
                  weight_min[m][v] = w;
                  weight_max[m][v] = w;
                } else {
                  weight_min[m][v] = std::min(weight_min[m][v], w);
                  weight_max[m][v] = std::max(weight_max[m][v], w);
                }
              }
            }
            return 0;
          });
    }
    total_frames += static_cast<long>(motion.frames.size());

    // Raster artifacts from the first sequence only.
    if (cfg.output.images && s == 0) {
      const int image_frames =
          std::min(cfg.output.image_frames, mvs.frame_count());
      for (std::size_t v = 0; v < rig.size(); ++v) {
        for (int t = 0; t < image_frames; ++t) {
          char name[64];
          std::snprintf(name, sizeof(name), "images/view%d_frame%04d.pgm",
                        mvs.view_ids[v], t);
          output.images.emplace_back(
              name, rasterize_view(mvs.observations[v][static_cast<
                                       std::size_t>(t)],
                                   model, rig[v].width, rig[v].height));
        }
      }
    }
  }

  for (std::size_t m = 0; m < mode_count; ++m) {
    ModeResult result;
    result.fusion = cfg.estimator.fusion_modes[m];
    result.metrics = detail::run_stage(
        "aggregate (" + std::string(to_string(result.fusion)) + ")",
        [&] { return aggregate(frame_metrics[m]); });
    for (std::size_t v = 0; v < rig.size(); ++v) {
      WeightStats stats;
      stats.view_id = rig[v].view_id;
      stats.mean = weight_sum[m][v] / static_cast<double>(total_frames);
      stats.min = weight_min[m][v];
      stats.max = weight_max[m][v];
      result.weights.push_back(stats);
    }
    output.report.modes.push_back(std::move(result));
  }

  if (cfg.output.plots) {
    std::vector<std::string> labels;
    std::vector<double> values;
    for (const ModeResult& mode : output.report.modes) {
      labels.push_back(to_string(mode.fusion));
      values.push_back(mode.metrics.overall.mpjpe_mm);
    }
    output.plots.emplace_back(
        "plots/mpjpe_by_mode.svg",
        svg_bar_chart("MPJPE by fusion mode", labels, values, "MPJPE (mm)"));

    const std::string x_label =
        cfg.corruption.mode == DeficiencyMode::noise
            ? "noise sigma (px)"
            : cfg.corruption.mode == DeficiencyMode::missing
                  ? "missing dropout"
                  : "occlusion dropout";
    output.plots.emplace_back(
        "plots/weights_vs_severity.svg",
        svg_line_chart("Mean adaptive weight vs severity", x_label,
                       "mean weight",
                       detail::run_stage("severity sweep", [&] {
                         return detail::weight_severity_sweep(cfg, model,
                                                              rig);
                       })));
  }

  output.report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return output;
}

// --------------------------------------------------------------------------
// Report serialization
// --------------------------------------------------------------------------

inline json report_to_json(const RunReport& report) {
  json root;
  root["schema_version"] = kReportSchemaVersion;
  root["toolkit_version"] = kToolkitVersion;
  root["config"] = config_to_json(report.config);

  json summary;
  json sequences = json::array();
  for (const SequenceManifest& seq : report.manifest) {
    json entry;
    entry["action"] = seq.action;
    json assignment = json::array();
    for (const DeficiencyKind kind : seq.assignment)
      assignment.push_back(to_string(kind));
    entry["assignment"] = std::move(assignment);
    sequences.push_back(std::move(entry));
  }
  summary["sequences"] = std::move(sequences);
  json counts;
  for (const DeficiencyKind kind : detail::kAllKinds)
    counts[to_string(kind)] =
        report.cell_counts[static_cast<std::size_t>(kind)];
  summary["cell_counts"] = std::move(counts);
  root["deficiency_summary"] = std::move(summary);

  json modes = json::array();
  for (const ModeResult& mode : report.modes) {
    json entry;
    entry["fusion"] = to_string(mode.fusion);
    entry["metrics"] = to_json(mode.metrics);
    json weights = json::array();
    for (const WeightStats& stats : mode.weights) {
      json w;
      w["view_id"] = stats.view_id;
      w["mean"] = stats.mean;
      w["min"] = stats.min;
      w["max"] = stats.max;
      weights.push_back(std::move(w));
    }
    entry["weights"] = std::move(weights);
    modes.push_back(std::move(entry));
  }
  root["modes"] = std::move(modes);
  return root;
}

inline std::string report_json_bytes(const RunReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

// CSV rows mirror the JSON: one block per fusion mode, actions sorted, ALL
// summary row last.
inline std::string report_csv_bytes(const RunReport& report) {
  std::string out = "mode,action,mpjpe,p_mpjpe,frames\n";
  for (const ModeResult& mode : report.modes) {
    const std::string name = to_string(mode.fusion);
    for (const MetricReport::Row& row : mode.metrics.actions)
      out += name + "," + row.action + "," + to_fixed(row.mpjpe_mm, 6) + "," +
             to_fixed(row.p_mpjpe_mm, 6) + "," + std::to_string(row.frames) +
             "\n";
    const MetricReport::Row& all = mode.metrics.overall;
    out += name + "," + all.action + "," + to_fixed(all.mpjpe_mm, 6) + "," +
           to_fixed(all.p_mpjpe_mm, 6) + "," + std::to_string(all.frames) +
           "\n";
  }
  return out;
}

// Writes report.json, report.csv, and any plot/image artifacts under
// `out_dir`, creating directories as needed. Pure IO: all bytes were fixed
// by run_experiment.
inline void write_outputs(const RunOutput& output,
                          const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  jsonio::write_text_file((fs::path(out_dir) / "report.json").string(),
                          report_json_bytes(output.report));
  jsonio::write_text_file((fs::path(out_dir) / "report.csv").string(),
                          report_csv_bytes(output.report));
  for (const auto& [rel_path, svg] : output.plots) {
    const fs::path path = fs::path(out_dir) / rel_path;
    fs::create_directories(path.parent_path());
    jsonio::write_text_file(path.string(), svg);
  }
  for (const auto& [rel_path, image] : output.images) {
    const fs::path path = fs::path(out_dir) / rel_path;
    fs::create_directories(path.parent_path());
    write_pnm(image, path);
  }
}

}  // namespace depropose
