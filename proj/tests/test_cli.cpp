// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end CLI checks: subcommand artifacts, exit codes, determinism.
// The binary path arrives via DEPROPOSE_CLI_PATH at compile time.

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "depropose/dataset.hpp"
#include "depropose/deficiency.hpp"
#include "depropose/serialize.hpp"

using namespace depropose;
namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

// Runs a shell command, capturing combined stdout+stderr.
CommandResult run_command(const std::string& command) {
  CommandResult result;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buffer;
  while (std::fgets(buffer.data(), static_cast<int>(buffer.size()), pipe))
    result.output += buffer.data();
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string cli() { return DEPROPOSE_CLI_PATH; }

struct ScratchDir {
  fs::path path;
  ScratchDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("depropose_cli_" + std::to_string(counter.fetch_add(1)) + "_" +
            std::to_string(static_cast<unsigned>(::getpid())));
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_small_config(const std::string& path, const std::string& out_dir) {
  jsonio::write_text_file(path, R"({
  "seed": 5,
  "motion": {"actions": ["walk"], "frames": 10},
  "corruption": {"enabled": true, "mode": "noise"},
  "output": {"dir": ")" + out_dir + R"(", "plots": false, "images": false}
})");
}

}  // namespace

TEST_CASE("version and usage errors", "[cli]") {
  SECTION("--version prints toolkit and schema versions, exit 0") {
    const CommandResult result = run_command(cli() + " --version");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("depropose 0.1.0") != std::string::npos);
    CHECK(result.output.find("schema") != std::string::npos);
  }

  SECTION("unknown flag exits 2") {
    const CommandResult result =
        run_command(cli() + " evaluate --such-flag 1");
    CHECK(result.exit_code == 2);
  }

  SECTION("unknown subcommand exits 2") {
    const CommandResult result = run_command(cli() + " transmogrify");
    CHECK(result.exit_code == 2);
  }

  SECTION("no subcommand exits 2 with usage text") {
    const CommandResult result = run_command(cli());
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("subcommand") != std::string::npos);
  }

  SECTION("--help exits 0") {
    const CommandResult result = run_command(cli() + " --help");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("generate") != std::string::npos);
    CHECK(result.output.find("demo-fusion") != std::string::npos);
  }
}

TEST_CASE("runtime failures exit 1 with a message", "[cli]") {
  ScratchDir dir;

  SECTION("missing config file") {
    const CommandResult result = run_command(
        cli() + " evaluate --config " + dir.file("absent.json") + " --out " +
        dir.file("r"));
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("error:") != std::string::npos);
  }

  SECTION("config with an unknown key") {
    jsonio::write_text_file(dir.file("bad.json"),
                            R"({"corruption": {"sigma_noise": 3}})");
    const CommandResult result = run_command(
        cli() + " evaluate --config " + dir.file("bad.json") + " --out " +
        dir.file("r"));
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("corruption.sigma_noise") != std::string::npos);
  }

  SECTION("corrupt on a tampered dataset fails the checksum") {
    write_small_config(dir.file("cfg.json"), dir.file("r"));
    REQUIRE(run_command(cli() + " generate --config " + dir.file("cfg.json") +
                        " --out " + dir.file("gen"))
                .exit_code == 0);
    std::string bytes = jsonio::read_text_file(dir.file("gen/dataset.json"));
    const auto at = bytes.find("\"frame_rate\": 50.0");
    REQUIRE(at != std::string::npos);
    bytes.replace(at, 18, "\"frame_rate\": 49.0");
    jsonio::write_text_file(dir.file("gen/dataset.json"), bytes);
    const CommandResult result = run_command(
        cli() + " corrupt --config " + dir.file("cfg.json") + " --in " +
        dir.file("gen/dataset.json") + " --out " + dir.file("cor"));
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("checksum") != std::string::npos);
  }
}

TEST_CASE("evaluate writes report.json and report.csv", "[cli]") {
  ScratchDir dir;
  write_small_config(dir.file("cfg.json"), dir.file("unused"));
  const CommandResult result = run_command(
      cli() + " evaluate --config " + dir.file("cfg.json") + " --out " +
      dir.file("run"));
  REQUIRE(result.exit_code == 0);
  REQUIRE(fs::exists(dir.file("run/report.json")));
  REQUIRE(fs::exists(dir.file("run/report.csv")));

  const json report =
      json::parse(jsonio::read_text_file(dir.file("run/report.json")));
  CHECK(report["modes"].size() == 2);
  CHECK(report["modes"][0]["fusion"] == "adaptive");
  const std::string csv =
      jsonio::read_text_file(dir.file("run/report.csv"));
  CHECK(csv.rfind("mode,action,mpjpe,p_mpjpe,frames\n", 0) == 0);
  CHECK(csv.find("adaptive,ALL,") != std::string::npos);

  SECTION("the report subcommand formats it as a table") {
    const CommandResult table =
        run_command(cli() + " report --in " + dir.file("run/report.json"));
    CHECK(table.exit_code == 0);
    CHECK(table.output.find("mpjpe(mm)") != std::string::npos);
    CHECK(table.output.find("ALL") != std::string::npos);
    CHECK(table.output.find("adaptive") != std::string::npos);
  }

  SECTION("without --out the config's output.dir is used") {
    write_small_config(dir.file("cfg2.json"), dir.file("from_config"));
    const CommandResult rerun =
        run_command(cli() + " evaluate --config " + dir.file("cfg2.json"));
    CHECK(rerun.exit_code == 0);
    CHECK(fs::exists(dir.file("from_config/report.json")));
  }
}

TEST_CASE("generate and corrupt round-trip datasets", "[cli]") {
  ScratchDir dir;
  write_small_config(dir.file("cfg.json"), dir.file("unused"));

  REQUIRE(run_command(cli() + " generate --config " + dir.file("cfg.json") +
                      " --out " + dir.file("gen"))
              .exit_code == 0);
  const Dataset clean = load_dataset(dir.file("gen/dataset.json"));
  REQUIRE(clean.sequences.size() == 1);
  CHECK(clean.cameras.size() == 4);
  CHECK(clean.sequences[0].frame_count() == 10);
  for (const auto& view_tags : clean.sequences[0].deficiency)
    for (const DeficiencyTag& tag : view_tags)
      CHECK(tag.kind == DeficiencyKind::clean);

  REQUIRE(run_command(cli() + " corrupt --config " + dir.file("cfg.json") +
                      " --in " + dir.file("gen/dataset.json") + " --out " +
                      dir.file("cor"))
              .exit_code == 0);
  const Dataset corrupted = load_dataset(dir.file("cor/dataset.json"));
  int degraded_views = 0;
  for (const auto& view_tags : corrupted.sequences[0].deficiency) {
    bool any = false;
    for (const DeficiencyTag& tag : view_tags) any |= tag.kind != DeficiencyKind::clean;
    degraded_views += any ? 1 : 0;
  }
  CHECK(degraded_views == 1);  // noise protocol: exactly 1 of 4 views

  SECTION("generation is deterministic in (config, seed)") {
    REQUIRE(run_command(cli() + " generate --config " + dir.file("cfg.json") +
                        " --out " + dir.file("gen2"))
                .exit_code == 0);
    CHECK(jsonio::read_text_file(dir.file("gen/dataset.json")) ==
          jsonio::read_text_file(dir.file("gen2/dataset.json")));
  }

  SECTION("--seed overrides the config seed") {
    REQUIRE(run_command(cli() + " generate --config " + dir.file("cfg.json") +
                        " --seed 999 --out " + dir.file("gen3"))
                .exit_code == 0);
    CHECK(jsonio::read_text_file(dir.file("gen/dataset.json")) !=
          jsonio::read_text_file(dir.file("gen3/dataset.json")));
  }
}

TEST_CASE("demo-fusion prints normalized weights", "[cli]") {
  const CommandResult result = run_command(
      cli() + " demo-fusion --views 4 --noisy-view 2 --sigma 20 --seed 7");
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("sum of mean weights: 1.000000") !=
        std::string::npos);
  CHECK(result.output.find("<- degraded") != std::string::npos);
  CHECK(result.output.find("view 2") != std::string::npos);

  SECTION("out-of-range noisy view is a runtime error") {
    const CommandResult bad =
        run_command(cli() + " demo-fusion --views 4 --noisy-view 9");
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("error:") != std::string::npos);
  }
}
