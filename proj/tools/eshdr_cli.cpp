// Copyright 2026 The eshdr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "eshdr/parallel.hpp"
#include "eshdr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace eshdr;
using namespace eshdr::pipeline;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::io: return 3;
    case ErrorCategory::validation: return 4;
    case ErrorCategory::numeric: return 5;
    case ErrorCategory::domain_mismatch: return 6;
  }
  return 1;
}

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("eshdr");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  const char* env = std::getenv("ESHDR_LOG");
  if (!env || !*env) return;
  const auto level = spdlog::level::from_str(env);
  if (level == spdlog::level::off && std::string(env) != "off")
    fail(ErrorCategory::config, std::string("ESHDR_LOG: unknown level '") + env + "'");
  spdlog::set_level(level);
}

/// Flags shared by every subcommand; set values override the config file.
struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<double> lambda_ev;
  std::optional<double> mu;
  std::optional<double> contrast_threshold;
  std::optional<std::string> fuse_mode;

  PipelineConfig resolve() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_config(config);
    if (seed) cfg.seed = *seed;
    if (lambda_ev) cfg.flow.lambda_ev = *lambda_ev;
    if (mu) cfg.mu = *mu;
    if (contrast_threshold) cfg.events.contrast_threshold = *contrast_threshold;
    if (fuse_mode) cfg.fuse_mode = parse_fuse_mode(*fuse_mode);
    cfg.validate();
    return cfg;
  }
};

/// `value` if set, else the run-layout default.
fs::path or_default(const std::string& value, const fs::path& fallback) {
  return value.empty() ? fallback : fs::path(value);
}

template <typename F>
void timed(const char* stage, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  spdlog::info("{}: {:.2f} s", stage, dt.count());
}

/// Either a fuse output directory or a single radiance PFM.
FuseOutput load_estimate(const fs::path& path) {
  if (fs::is_directory(path)) return load_fused(path);
  FuseOutput out;
  out.radiance = io::read_radiance(path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-assisted multi-exposure HDR toolkit", "eshdr"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ESHDR_VERSION));

  Overrides o;
  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output location (run directory for pipeline, stage output otherwise)");
  app.add_option("--seed", o.seed, "Global seed");
  app.add_option("--threads", o.threads, "Worker threads (0: machine parallelism)");
  app.add_option("--lambda-ev", o.lambda_ev, "Weight of the event channel in flow estimation");
  app.add_option("--mu", o.mu, "Mu-law compression parameter");
  app.add_option("--contrast-threshold", o.contrast_threshold, "Event contrast threshold");
  app.add_option("--fuse-mode", o.fuse_mode, "debevec or mertens");

  std::string scene_in, ldr_in, events_in, input, estimate, truth;
  bool dump_frames = false;

  auto* sim = app.add_subcommand("simulate-scene", "Write background, trajectories and scene index");
  sim->add_flag("--frames", dump_frames, "Also write every rendered frame");
  auto* deg = app.add_subcommand("degrade", "Render the bracket as LDR captures");
  deg->add_option("--scene", scene_in, "Scene directory");
  auto* ev = app.add_subcommand("simulate-events", "Simulate the event stream of a scene");
  ev->add_option("--scene", scene_in, "Scene directory");
  auto* dbl = app.add_subcommand("deblur", "Deblur every capture with events");
  dbl->add_option("--ldr", ldr_in, "LDR directory");
  dbl->add_option("--events", events_in, "Event file");
  auto* aln = app.add_subcommand("align", "Warp every frame onto the reference");
  aln->add_option("--input", input, "Deblurred frame directory");
  aln->add_option("--events", events_in, "Event file");
  auto* fus = app.add_subcommand("fuse", "Merge aligned frames");
  fus->add_option("--input", input, "Aligned frame directory");
  auto* tm = app.add_subcommand("tonemap", "Tone-map a fused result");
  tm->add_option("--input", input, "Fuse output directory");
  auto* evl = app.add_subcommand("evaluate", "Score an estimate against ground truth");
  evl->add_option("--estimate", estimate, "Fuse output directory or radiance PFM")->required();
  evl->add_option("--truth", truth, "Ground-truth radiance PFM")->required();
  auto* pip = app.add_subcommand("pipeline", "Run every stage and write the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    setup_logging();
    set_thread_count(o.threads);
    PipelineConfig cfg = o.resolve();
    if (pip->parsed() && !o.out.empty()) cfg.output = o.out;
    const RunLayout run{cfg.output};
    const fs::path scene_dir = or_default(scene_in, run.scene());
    const fs::path events_path = or_default(events_in, run.events());

    if (sim->parsed()) {
      timed("simulate-scene", [&] { simulate_scene(cfg, or_default(o.out, run.scene()), dump_frames); });
    } else if (deg->parsed()) {
      timed("degrade", [&] { degrade(cfg, scene_dir, or_default(o.out, run.ldr())); });
    } else if (ev->parsed()) {
      timed("simulate-events", [&] { simulate_events_stage(cfg, scene_dir, or_default(o.out, run.events())); });
    } else if (dbl->parsed()) {
      timed("deblur", [&] {
        deblur(cfg, or_default(ldr_in, run.ldr()), events_path, or_default(o.out, run.deblurred()));
      });
    } else if (aln->parsed()) {
      timed("align", [&] {
        align(cfg, or_default(input, run.deblurred()), events_path, or_default(o.out, run.aligned()));
      });
    } else if (fus->parsed()) {
      timed("fuse", [&] { fuse(cfg, or_default(input, run.aligned()), or_default(o.out, run.fused())); });
    } else if (tm->parsed()) {
      timed("tonemap", [&] { tonemap(cfg, or_default(input, run.fused()), or_default(o.out, run.tonemapped())); });
    } else if (evl->parsed()) {
      const MetricReport r = evaluate_fused(cfg, load_estimate(estimate), io::read_radiance(truth));
      std::cout << report_to_text(r);
      if (!o.out.empty()) write_report(o.out, r);
    } else if (pip->parsed()) {
      PipelineResult r;
      timed("pipeline", [&] { r = run_pipeline(cfg); });
      std::cout << report_to_text(r.result);
      if (r.baseline) {
        for (const auto& [k, v] : r.baseline->values)
          std::cout << "baseline_" << k << ": " << format_number(v) << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "eshdr: " << to_string(e.category()) << " error: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "eshdr: io error: " << e.what() << "\n";
    return exit_code(ErrorCategory::io);
  } catch (const std::exception& e) {
    std::cerr << "eshdr: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
