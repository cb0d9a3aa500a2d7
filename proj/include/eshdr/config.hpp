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
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eshdr/align.hpp"
#include "eshdr/degrade.hpp"
#include "eshdr/error.hpp"
#include "eshdr/eventsim.hpp"
#include "eshdr/fuse.hpp"
#include "eshdr/io/sidecar.hpp"
#include "eshdr/transfer.hpp"

namespace eshdr {

enum class FuseMode { debevec, mertens };

inline std::string_view to_string(FuseMode m) { return m == FuseMode::debevec ? "debevec" : "mertens"; }

inline FuseMode parse_fuse_mode(std::string_view name) {
  if (name == "debevec") return FuseMode::debevec;
  if (name == "mertens") return FuseMode::mertens;
  fail(ErrorCategory::config,
       "fuse mode must be 'debevec' or 'mertens', got '" + std::string(name) + "'");
}

struct SceneConfig {
  int width = 64;
  int height = 64;
  double alpha_smooth = 0.99;
  double motion_bound = 0.5;
  TimeNs frame_interval = 100'000;
  std::string background;  // PFM path; empty selects the procedural background
  double background_stops = 12.0;
  double background_mid_gray = 0.18;  // median radiance of the procedural background
  std::string foreground;        // PFM path, optional
  std::string foreground_alpha;  // PFM path, required with a foreground
};

struct EventsConfig {
  double contrast_threshold = 0.2;
  double log_floor = 1e-4;
};

struct MetricsConfig {
  bool psnr = true;
  bool ssim = true;
  bool mu_psnr = true;
  bool mu_ssim = true;
  bool charbonnier = true;
  bool baseline = true;  // also evaluate the unaligned, undeblurred merge
};

/// Everything a run depends on. The frame count follows from the bracket
/// schedule; the global seed drives motion, the procedural background and
/// noise.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string output = "eshdr_run";
  SceneConfig scene;
  BracketSpec bracket = [] {
    BracketSpec b;
    b.anchor = 1.0 / b.base_exposure;
    return b;
  }();
  EventsConfig events;
  bool deblur = true;
  bool align = true;
  FlowParams flow;
  FuseMode fuse_mode = FuseMode::debevec;
  double mu = kDefaultMu;
  MetricsConfig metrics;

  BracketSpec bracket_spec() const {
    BracketSpec b = bracket;
    b.seed = seed;
    b.frame_interval = scene.frame_interval;
    return b;
  }

  EventSimConfig event_config() const { return {events.contrast_threshold, events.log_floor}; }

  void validate() const {
    auto check = [](bool ok, const std::string& what) { require(ok, ErrorCategory::config, what); };
    check(scene.width >= 16 && scene.height >= 16, "scene.width and scene.height must be at least 16");
    check(scene.alpha_smooth >= 0.0 && scene.alpha_smooth <= 1.0, "scene.alpha_smooth must lie in [0, 1]");
    check(std::isfinite(scene.motion_bound) && scene.motion_bound >= 0.0,
          "scene.motion_bound must be non-negative");
    check(scene.frame_interval > 0, "scene.frame_interval_ns must be positive");
    check(std::isfinite(scene.background_stops) && scene.background_stops > 0.0,
          "scene.background_stops must be positive");
    check(std::isfinite(scene.background_mid_gray) && scene.background_mid_gray > 0.0,
          "scene.background_mid_gray must be positive");
    check(scene.foreground.empty() == scene.foreground_alpha.empty(),
          "scene.foreground and scene.foreground_alpha must be given together");
    check(std::isfinite(events.contrast_threshold) && events.contrast_threshold > 0.0,
          "events.contrast_threshold must be positive");
    check(std::isfinite(events.log_floor) && events.log_floor > 0.0, "events.log_floor must be positive");
    check(flow.window >= 1 && flow.window % 2 == 1, "align.window must be odd and positive");
    check(flow.iterations >= 0 && flow.coarsest_size >= 1, "align.iterations and align.coarsest_size are invalid");
    check(std::isfinite(flow.lambda_ev) && flow.lambda_ev >= 0.0, "align.lambda_ev must be non-negative");
    check(flow.damping >= 0.0 && flow.max_step > 0.0 && flow.eigen_floor >= 0.0,
          "align.damping, align.max_step and align.eigen_floor are invalid");
    check(std::isfinite(mu) && mu > 0.0, "fuse.mu must be positive");
    check(!output.empty(), "output must not be empty");
    try {
      bracket_spec().validate();
    } catch (const Error& e) {
      fail(ErrorCategory::config, std::string("bracket: ") + e.what());
    }
  }
};

namespace detail {

/// Reads one JSON object, remembering which keys were consumed so unknown
/// keys can be reported by their full dotted name.
class ConfigObject {
 public:
  ConfigObject(const io::Json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    require(doc_.is_object(), ErrorCategory::config,
            "config " + (path_.empty() ? std::string("root") : "key '" + path_ + "'") +
                " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) return;
    const std::string name = qualified(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        require(it->is_boolean(), ErrorCategory::config, "config key '" + name + "' must be a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (it->is_null()) {
          out.clear();
          return;
        }
        require(it->is_string(), ErrorCategory::config, "config key '" + name + "' must be a string");
      } else if constexpr (std::is_integral_v<T>) {
        if constexpr (std::is_unsigned_v<T>)
          require(it->is_number_unsigned(), ErrorCategory::config,
                  "config key '" + name + "' must be a non-negative integer");
        else
          require(it->is_number_integer(), ErrorCategory::config,
                  "config key '" + name + "' must be an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        require(it->is_number(), ErrorCategory::config, "config key '" + name + "' must be a number");
      } else {
        require(it->is_array(), ErrorCategory::config, "config key '" + name + "' must be an array");
        for (const auto& v : *it)
          require(v.is_number(), ErrorCategory::config,
                  "config key '" + name + "' must hold only numbers");
      }
      out = it->template get<T>();
    } catch (const io::Json::exception& e) {
      fail(ErrorCategory::config, "config key '" + name + "': " + e.what());
    }
  }

  ConfigObject child(const char* key) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    static const io::Json empty = io::Json::object();
    return ConfigObject(it == doc_.end() ? empty : *it, qualified(key));
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it)
      if (!seen_.count(it.key()))
        fail(ErrorCategory::config, "unknown config key '" + qualified(it.key()) + "'");
  }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const io::Json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

/// Strict parse: unknown keys and mistyped values are config errors; absent
/// keys keep their defaults. The result is validated.
inline PipelineConfig config_from_json(const io::Json& doc) {
  PipelineConfig cfg;
  detail::ConfigObject root(doc, "");
  root.read("seed", cfg.seed);
  root.read("output", cfg.output);

  auto scene = root.child("scene");
  scene.read("width", cfg.scene.width);
  scene.read("height", cfg.scene.height);
  scene.read("alpha_smooth", cfg.scene.alpha_smooth);
  scene.read("motion_bound", cfg.scene.motion_bound);
  scene.read("frame_interval_ns", cfg.scene.frame_interval);
  scene.read("background", cfg.scene.background);
  scene.read("background_stops", cfg.scene.background_stops);
  scene.read("background_mid_gray", cfg.scene.background_mid_gray);
  scene.read("foreground", cfg.scene.foreground);
  scene.read("foreground_alpha", cfg.scene.foreground_alpha);
  scene.finish();

  auto bracket = root.child("bracket");
  bracket.read("evs", cfg.bracket.evs);
  bracket.read("base_exposure", cfg.bracket.base_exposure);
  bracket.read("anchor", cfg.bracket.anchor);
  bracket.read("noise_a", cfg.bracket.noise_a);
  bracket.read("noise_b", cfg.bracket.noise_b);
  bracket.read("readout_gap_ns", cfg.bracket.readout_gap);
  bracket.read("gamma", cfg.bracket.gamma);
  bracket.finish();

  auto events = root.child("events");
  events.read("contrast_threshold", cfg.events.contrast_threshold);
  events.read("log_floor", cfg.events.log_floor);
  events.finish();

  auto deblur = root.child("deblur");
  deblur.read("enabled", cfg.deblur);
  deblur.finish();

  auto align = root.child("align");
  align.read("enabled", cfg.align);
  align.read("coarsest_size", cfg.flow.coarsest_size);
  align.read("window", cfg.flow.window);
  align.read("iterations", cfg.flow.iterations);
  align.read("lambda_ev", cfg.flow.lambda_ev);
  align.read("damping", cfg.flow.damping);
  align.read("max_step", cfg.flow.max_step);
  align.read("eigen_floor", cfg.flow.eigen_floor);
  align.finish();

  auto fuse = root.child("fuse");
  std::string mode(to_string(cfg.fuse_mode));
  fuse.read("mode", mode);
  cfg.fuse_mode = parse_fuse_mode(mode);
  fuse.read("mu", cfg.mu);
  fuse.finish();

  auto metrics = root.child("metrics");
  metrics.read("psnr", cfg.metrics.psnr);
  metrics.read("ssim", cfg.metrics.ssim);
  metrics.read("mu_psnr", cfg.metrics.mu_psnr);
  metrics.read("mu_ssim", cfg.metrics.mu_ssim);
  metrics.read("charbonnier", cfg.metrics.charbonnier);
  metrics.read("baseline", cfg.metrics.baseline);
  metrics.finish();

  root.finish();
  cfg.validate();
  return cfg;
}

/// Every field, defaults included, in the same layout config_from_json reads.
inline io::Json config_to_json(const PipelineConfig& cfg) {
  auto optional_path = [](const std::string& p) { return p.empty() ? io::Json(nullptr) : io::Json(p); };
  io::Json j;
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  j["scene"] = {{"width", cfg.scene.width},
                {"height", cfg.scene.height},
                {"alpha_smooth", cfg.scene.alpha_smooth},
                {"motion_bound", cfg.scene.motion_bound},
                {"frame_interval_ns", cfg.scene.frame_interval},
                {"background", optional_path(cfg.scene.background)},
                {"background_stops", cfg.scene.background_stops},
                {"background_mid_gray", cfg.scene.background_mid_gray},
                {"foreground", optional_path(cfg.scene.foreground)},
                {"foreground_alpha", optional_path(cfg.scene.foreground_alpha)}};
  j["bracket"] = {{"evs", cfg.bracket.evs},
                  {"base_exposure", cfg.bracket.base_exposure},
                  {"anchor", cfg.bracket.anchor},
                  {"noise_a", cfg.bracket.noise_a},
                  {"noise_b", cfg.bracket.noise_b},
                  {"readout_gap_ns", cfg.bracket.readout_gap},
                  {"gamma", cfg.bracket.gamma}};
  j["events"] = {{"contrast_threshold", cfg.events.contrast_threshold},
                 {"log_floor", cfg.events.log_floor}};
  j["deblur"] = {{"enabled", cfg.deblur}};
  j["align"] = {{"enabled", cfg.align},
                {"coarsest_size", cfg.flow.coarsest_size},
                {"window", cfg.flow.window},
                {"iterations", cfg.flow.iterations},
                {"lambda_ev", cfg.flow.lambda_ev},
                {"damping", cfg.flow.damping},
                {"max_step", cfg.flow.max_step},
                {"eigen_floor", cfg.flow.eigen_floor}};
  j["fuse"] = {{"mode", to_string(cfg.fuse_mode)}, {"mu", cfg.mu}};
  j["metrics"] = {{"psnr", cfg.metrics.psnr},
                  {"ssim", cfg.metrics.ssim},
                  {"mu_psnr", cfg.metrics.mu_psnr},
                  {"mu_ssim", cfg.metrics.mu_ssim},
                  {"charbonnier", cfg.metrics.charbonnier},
                  {"baseline", cfg.metrics.baseline}};
  return j;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  io::Json doc;
  try {
    doc = io::Json::parse(text);
  } catch (const io::Json::parse_error& e) {
    fail(ErrorCategory::config,
         path.string() + ": malformed config at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    return config_from_json(doc);
  } catch (const Error& e) {
    fail(e.category(), path.string() + ": " + e.what());
  }
}

}  // namespace eshdr
