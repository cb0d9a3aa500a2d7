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

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eshdr/align.hpp"
#include "eshdr/config.hpp"
#include "eshdr/deblur.hpp"
#include "eshdr/degrade.hpp"
#include "eshdr/eventsim.hpp"
#include "eshdr/fuse.hpp"
#include "eshdr/io/event_file.hpp"
#include "eshdr/io/flow_file.hpp"
#include "eshdr/io/pfm.hpp"
#include "eshdr/io/pnm.hpp"
#include "eshdr/io/sidecar.hpp"
#include "eshdr/metrics.hpp"
#include "eshdr/scenesim.hpp"

#ifndef ESHDR_VERSION
#define ESHDR_VERSION "0.0.0"
#endif

namespace eshdr::pipeline {

namespace fs = std::filesystem;
using io::Json;

/// Directory layout of one run. Each stage reads the previous stage's
/// directory and writes its own.
struct RunLayout {
  fs::path root;

  fs::path scene() const { return root / "scene"; }
  fs::path ldr() const { return root / "ldr"; }
  fs::path events() const { return root / "events" / "events.eshdr"; }
  fs::path deblurred() const { return root / "deblurred"; }
  fs::path aligned() const { return root / "aligned"; }
  fs::path fused() const { return root / "fused"; }
  fs::path tonemapped() const { return root / "tonemapped"; }
  fs::path evaluation() const { return root / "evaluation"; }
  fs::path baseline() const { return root / "baseline"; }
  fs::path manifest() const { return root / "manifest.json"; }
  fs::path truth() const { return ldr() / "truth.pfm"; }
};

inline constexpr const char* kIndexFile = "index.json";

inline Json vec_to_json(Vec2 v) { return Json::array({v.x, v.y}); }

inline Json read_json_key(const Json& doc, const char* key, const fs::path& source) {
  if (!doc.is_object() || !doc.contains(key))
    fail(ErrorCategory::io, source.string() + ": missing key '" + key + "'");
  return doc.at(key);
}

template <typename T>
T json_get(const Json& doc, const char* key, const fs::path& source) {
  try {
    return read_json_key(doc, key, source).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCategory::io, source.string() + ": invalid value for '" + key + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Scene

/// Renders lazily from the files written by write_scene.
struct StoredScene {
  SceneRenderer renderer;
};

/// Writes the background (and foreground) radiance plus the per-frame
/// trajectories. Frames are rendered on demand by later stages; with
/// `write_frames` every frame is also written as a numbered PFM.
inline void simulate_scene(const PipelineConfig& cfg, const fs::path& dir, bool write_frames = false) {
  cfg.validate();
  const BracketSchedule schedule = make_schedule(cfg.bracket_spec());
  const std::size_t count = schedule.frames_required;
  const auto& sc = cfg.scene;
  Trajectory bg = motion_trajectory(count, sc.alpha_smooth, sc.motion_bound, cfg.seed, 0);
  Trajectory fg = motion_trajectory(count, sc.alpha_smooth, sc.motion_bound, cfg.seed, 1);

  RadianceImage background;
  if (sc.background.empty()) {
    const int margin = static_cast<int>(std::ceil(bg.extent())) + 1;
    const double peak = sc.background_mid_gray * std::exp2(0.5 * sc.background_stops);
    background = RadianceImage(procedural_radiance(sc.width + 2 * margin, sc.height + 2 * margin, 3,
                                                   cfg.seed, sc.background_stops, peak));
  } else {
    background = io::read_radiance(sc.background);
  }

  SceneSpec spec;
  spec.background = background;
  spec.alpha_smooth = sc.alpha_smooth;
  spec.motion_bound = sc.motion_bound;
  spec.frame_count = count;
  spec.frame_interval = sc.frame_interval;
  spec.seed = cfg.seed;
  spec.crop = std::pair{sc.width, sc.height};
  if (!sc.foreground.empty())
    spec.foreground = Foreground{io::read_radiance(sc.foreground), io::read_pfm(sc.foreground_alpha)};
  const SceneRenderer renderer(spec, bg, fg);

  fs::create_directories(dir);
  io::write_pfm(dir / "background.pfm", spec.background);
  if (spec.foreground) {
    io::write_pfm(dir / "foreground.pfm", spec.foreground->image);
    io::write_pfm(dir / "foreground_alpha.pfm", spec.foreground->alpha);
  }
  auto trajectory_json = [&](const Trajectory& t) {
    Json shift = Json::array(), position = Json::array();
    for (std::size_t k = 0; k < count; ++k) {
      shift.push_back(vec_to_json(t.shift[k]));
      position.push_back(vec_to_json(t.position[k]));
    }
    return Json{{"shift", std::move(shift)}, {"position", std::move(position)}};
  };
  Json doc;
  doc["width"] = sc.width;
  doc["height"] = sc.height;
  doc["frame_count"] = count;
  doc["frame_interval_ns"] = sc.frame_interval;
  doc["alpha_smooth"] = sc.alpha_smooth;
  doc["motion_bound"] = sc.motion_bound;
  doc["seed"] = cfg.seed;
  doc["background"] = "background.pfm";
  doc["foreground"] = spec.foreground ? Json("foreground.pfm") : Json(nullptr);
  doc["foreground_alpha"] = spec.foreground ? Json("foreground_alpha.pfm") : Json(nullptr);
  doc["trajectory"] = {{"background", trajectory_json(bg)}, {"foreground", trajectory_json(fg)}};
  if (write_frames) {
    Json frames = Json::array();
    for (std::size_t k = 0; k < count; ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%06zu.pfm", k);
      io::write_pfm(dir / "frames" / name, renderer[k].image);
      frames.push_back({{"image", std::string("frames/") + name}, {"timestamp_ns", renderer.timestamp(k)}});
    }
    doc["frames"] = std::move(frames);
  }
  io::write_json(dir / "scene.json", doc);
}

inline SceneRenderer load_scene(const fs::path& dir) {
  const fs::path index = dir / "scene.json";
  const Json doc = io::read_json(index);
  SceneSpec spec;
  spec.background = io::read_radiance(dir / json_get<std::string>(doc, "background", index));
  spec.alpha_smooth = json_get<double>(doc, "alpha_smooth", index);
  spec.motion_bound = json_get<double>(doc, "motion_bound", index);
  spec.frame_count = json_get<std::size_t>(doc, "frame_count", index);
  spec.frame_interval = json_get<TimeNs>(doc, "frame_interval_ns", index);
  spec.seed = json_get<std::uint64_t>(doc, "seed", index);
  spec.crop = std::pair{json_get<int>(doc, "width", index), json_get<int>(doc, "height", index)};
  const Json fg = read_json_key(doc, "foreground", index);
  if (!fg.is_null())
    spec.foreground = Foreground{io::read_radiance(dir / fg.get<std::string>()),
                                 io::read_pfm(dir / json_get<std::string>(doc, "foreground_alpha", index))};
  const Json traj = read_json_key(doc, "trajectory", index);
  auto parse = [&](const char* layer) {
    Trajectory t;
    try {
      for (const auto& p : traj.at(layer).at("shift")) t.shift.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      for (const auto& p : traj.at(layer).at("position"))
        t.position.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    } catch (const Json::exception& e) {
      fail(ErrorCategory::io, index.string() + ": invalid " + layer + " trajectory: " + e.what());
    }
    return t;
  };
  return SceneRenderer(std::move(spec), parse("background"), parse("foreground"));
}

// ---------------------------------------------------------------------------
// Degrade

struct LdrSet {
  std::vector<LdrFrame> frames;
  std::size_t reference = 0;
  TimeNs reference_time = 0;
};

inline void degrade(const PipelineConfig& cfg, const fs::path& scene_dir, const fs::path& dir) {
  cfg.validate();
  const SceneRenderer renderer = load_scene(scene_dir);
  const BracketSpec spec = cfg.bracket_spec();
  const DegradedBracket out = degrade_bracket(renderer, spec);

  Json frames = Json::array();
  for (std::size_t n = 0; n < out.frames.size(); ++n) {
    const std::string name = "frame_" + std::to_string(n) + ".ppm";
    io::write_ldr_frame(dir / name, out.frames[n]);
    const auto& slot = out.schedule.slots[n];
    frames.push_back({{"image", name}, {"ev", slot.ev}, {"first_sample", slot.first},
                      {"sample_count", slot.count}});
  }
  io::write_pfm(dir / "truth.pfm", out.truth.hdr);
  Json doc;
  doc["reference"] = out.schedule.reference;
  doc["reference_time_ns"] = out.schedule.reference_time;
  doc["reference_sample"] = out.schedule.reference_frame;
  doc["frames_required"] = out.schedule.frames_required;
  doc["truth"] = "truth.pfm";
  doc["frames"] = std::move(frames);
  io::write_json(dir / kIndexFile, doc);
}

inline LdrSet load_ldr(const fs::path& dir) {
  const fs::path index = dir / kIndexFile;
  const Json doc = io::read_json(index);
  LdrSet set;
  set.reference = json_get<std::size_t>(doc, "reference", index);
  set.reference_time = json_get<TimeNs>(doc, "reference_time_ns", index);
  for (const auto& f : read_json_key(doc, "frames", index))
    set.frames.push_back(io::read_ldr_frame(dir / json_get<std::string>(f, "image", index)));
  require(set.reference < set.frames.size(), ErrorCategory::io,
          index.string() + ": reference index out of range");
  return set;
}

// ---------------------------------------------------------------------------
// Events

inline void simulate_events_stage(const PipelineConfig& cfg, const fs::path& scene_dir,
                                  const fs::path& path) {
  cfg.validate();
  const SceneRenderer renderer = load_scene(scene_dir);
  io::write_events(path, simulate_events(renderer, cfg.event_config()));
}

// ---------------------------------------------------------------------------
// Float frame sets (deblurred and aligned)

struct FloatFrame {
  NormalizedImage image;  // gamma-encoded
  CaptureInfo info;
  TimeNs target = 0;      // instant the frame depicts
};

struct FloatSet {
  std::vector<FloatFrame> frames;
  std::size_t reference = 0;
  TimeNs reference_time = 0;
};

inline void write_float_set(const fs::path& dir, const FloatSet& set,
                            const std::vector<std::optional<FlowField>>& flows = {}) {
  Json frames = Json::array();
  for (std::size_t n = 0; n < set.frames.size(); ++n) {
    const auto& f = set.frames[n];
    const std::string name = "frame_" + std::to_string(n) + ".pfm";
    io::write_pfm(dir / name, f.image.pixels());
    Json entry = io::capture_to_json(f.info);
    entry["image"] = name;
    entry["target_ns"] = f.target;
    if (n < flows.size() && flows[n]) {
      const std::string flow_name = "flow_" + std::to_string(n) + ".pfm";
      io::write_flow(dir / flow_name, *flows[n]);
      entry["flow"] = flow_name;
    }
    frames.push_back(std::move(entry));
  }
  Json doc;
  doc["domain"] = "gamma";
  doc["reference"] = set.reference;
  doc["reference_time_ns"] = set.reference_time;
  doc["frames"] = std::move(frames);
  io::write_json(dir / kIndexFile, doc);
}

inline FloatSet load_float_set(const fs::path& dir) {
  const fs::path index = dir / kIndexFile;
  const Json doc = io::read_json(index);
  require(json_get<std::string>(doc, "domain", index) == "gamma", ErrorCategory::domain_mismatch,
          index.string() + ": expected gamma-encoded frames");
  FloatSet set;
  set.reference = json_get<std::size_t>(doc, "reference", index);
  set.reference_time = json_get<TimeNs>(doc, "reference_time_ns", index);
  for (const auto& f : read_json_key(doc, "frames", index)) {
    const fs::path image = dir / json_get<std::string>(f, "image", index);
    Image<float> px = io::read_pfm(image);
    try {
      set.frames.push_back({NormalizedImage(std::move(px), Domain::gamma_encoded),
                            io::capture_from_json(f, index.string()),
                            json_get<TimeNs>(f, "target_ns", index)});
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::io) throw;
      fail(e.category(), image.string() + ": " + e.what());
    }
  }
  require(set.reference < set.frames.size(), ErrorCategory::io,
          index.string() + ": reference index out of range");
  return set;
}

// ---------------------------------------------------------------------------
// Deblur

/// Each capture is deblurred to the instant of its own exposure nearest the
/// reference instant.
inline TimeNs deblur_target(const CaptureInfo& info, TimeNs reference_time) {
  return std::clamp(reference_time, info.timestamp, info.end());
}

inline void deblur(const PipelineConfig& cfg, const fs::path& ldr_dir, const fs::path& events_path,
                   const fs::path& dir) {
  cfg.validate();
  const LdrSet ldr = load_ldr(ldr_dir);
  FloatSet out{{}, ldr.reference, ldr.reference_time};
  std::optional<EventIndex> index;
  if (cfg.deblur) {
    const EventStream stream = io::read_events(events_path);
    index.emplace(stream);
  }
  for (const auto& frame : ldr.frames) {
    const TimeNs target = deblur_target(frame.info(), ldr.reference_time);
    NormalizedImage image = index ? edi_deblur(frame, *index, target, cfg.bracket.gamma).image
                                  : to_normalized(frame);
    out.frames.push_back({std::move(image), frame.info(), index ? target : exposure_midpoint(frame.info())});
  }
  write_float_set(dir, out);
}

// ---------------------------------------------------------------------------
// Align

/// Event window of the reference exposure's length centred on `t`, shifted
/// to lie inside the recording.
inline EventWindow event_window(TimeNs t, TimeNs duration, const EventStream& stream) {
  duration = std::min(duration, stream.end() - stream.begin());
  const TimeNs start = std::clamp(t - duration / 2, stream.begin(), stream.end() - duration);
  return {start, duration};
}

/// Warps every frame onto the reference instant. Flow is frozen at zero
/// wherever no event fired between the two exposures.
inline void align(const PipelineConfig& cfg, const fs::path& deblurred_dir,
                  const fs::path& events_path, const fs::path& dir) {
  cfg.validate();
  FloatSet set = load_float_set(deblurred_dir);
  std::vector<std::optional<FlowField>> flows(set.frames.size());
  if (cfg.align) {
    const EventStream stream = io::read_events(events_path);
    const EventIndex index(stream);
    const FloatFrame& ref = set.frames[set.reference];
    const TimeNs duration = ref.info.end() - ref.info.timestamp;
    const EventWindow ref_window = event_window(ref.target, duration, stream);
    std::vector<NormalizedImage> warped(set.frames.size());
    for (std::size_t n = 0; n < set.frames.size(); ++n) {
      if (n == set.reference) continue;
      const FloatFrame& f = set.frames[n];
      const NormalizedImage ref_aligned =
          exposure_align(ref.image, f.info.exposure_time, ref.info.exposure_time, cfg.bracket.gamma);
      const EventWindow window = event_window(f.target, duration, stream);
      const auto channels = build_alignment_channels(
          f.image, ref_aligned, stream, index, window, ref_window, cfg.bracket.gamma);
      FlowField flow = estimate_flow(channels.first, channels.second, cfg.flow);
      freeze_static(flow, index, std::min({window.start, ref_window.start, f.info.timestamp}),
                    std::max({window.end(), ref_window.end(), f.info.end()}), cfg.flow.window / 2);
      warped[n] = backward_warp(f.image, flow).image;
      flows[n] = std::move(flow);
    }
    for (std::size_t n = 0; n < set.frames.size(); ++n)
      if (n != set.reference) {
        set.frames[n].image = std::move(warped[n]);
        set.frames[n].target = ref.target;
      }
  }
  write_float_set(dir, set, flows);
}

// ---------------------------------------------------------------------------
// Fuse

struct FuseOutput {
  FuseMode mode = FuseMode::debevec;
  std::optional<RadianceImage> radiance;  // debevec
  std::optional<NormalizedImage> display; // mertens, gamma-encoded
};

/// Debevec output is scaled from exposure units at 0 EV to scene radiance.
inline FuseOutput fuse_frames(const PipelineConfig& cfg, const std::vector<NormalizedImage>& images,
                              const std::vector<double>& evs) {
  FuseOutput out;
  out.mode = cfg.fuse_mode;
  if (cfg.fuse_mode == FuseMode::debevec) {
    std::vector<ExposedImage> frames;
    for (std::size_t n = 0; n < images.size(); ++n) frames.push_back({images[n], evs[n]});
    Image<float> h = debevec_merge(frames, cfg.bracket.gamma).pixels();
    const double scale = 1.0 / (cfg.bracket.anchor * cfg.bracket.base_exposure);
    for (float& v : h.samples()) v = static_cast<float>(v * scale);
    out.radiance = RadianceImage(std::move(h));
  } else {
    out.display = mertens_fuse(images);
  }
  return out;
}

inline void write_fused(const fs::path& dir, const FuseOutput& out) {
  Json doc;
  doc["mode"] = to_string(out.mode);
  if (out.radiance) {
    io::write_pfm(dir / "hdr.pfm", *out.radiance);
    doc["image"] = "hdr.pfm";
    doc["domain"] = "radiance";
  } else {
    io::write_pfm(dir / "fused.pfm", out.display->pixels());
    doc["image"] = "fused.pfm";
    doc["domain"] = "gamma";
  }
  io::write_json(dir / "fused.json", doc);
}

inline FuseOutput load_fused(const fs::path& dir) {
  const fs::path index = dir / "fused.json";
  const Json doc = io::read_json(index);
  FuseOutput out;
  out.mode = parse_fuse_mode(json_get<std::string>(doc, "mode", index));
  const fs::path image = dir / json_get<std::string>(doc, "image", index);
  const std::string domain = json_get<std::string>(doc, "domain", index);
  if (domain == "radiance") {
    out.radiance = io::read_radiance(image);
  } else if (domain == "gamma") {
    try {
      out.display = NormalizedImage(io::read_pfm(image), Domain::gamma_encoded);
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::io) throw;
      fail(e.category(), image.string() + ": " + e.what());
    }
  } else {
    fail(ErrorCategory::io, index.string() + ": unknown domain '" + domain + "'");
  }
  return out;
}

inline void fuse(const PipelineConfig& cfg, const fs::path& aligned_dir, const fs::path& dir) {
  cfg.validate();
  const FloatSet set = load_float_set(aligned_dir);
  std::vector<NormalizedImage> images;
  std::vector<double> evs;
  for (const auto& f : set.frames) {
    images.push_back(f.image);
    evs.push_back(f.info.ev);
  }
  write_fused(dir, fuse_frames(cfg, images, evs));
}

/// The unaligned, undeblurred merge of the raw captures.
inline void naive_merge(const PipelineConfig& cfg, const fs::path& ldr_dir, const fs::path& dir) {
  cfg.validate();
  const LdrSet ldr = load_ldr(ldr_dir);
  std::vector<NormalizedImage> images;
  std::vector<double> evs;
  for (const auto& f : ldr.frames) {
    images.push_back(to_normalized(f));
    evs.push_back(f.info().ev);
  }
  write_fused(dir, fuse_frames(cfg, images, evs));
}

// ---------------------------------------------------------------------------
// Tone mapping

inline Image<std::uint8_t> to_codes(const NormalizedImage& img) {
  const auto& px = img.pixels();
  Image<std::uint8_t> out(px.width(), px.height(), px.channels());
  auto src = px.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::round(src[i] * 255.0), 0.0, 255.0));
  return out;
}

inline void tonemap(const PipelineConfig& cfg, const fs::path& fused_dir, const fs::path& dir) {
  cfg.validate();
  const FuseOutput fused = load_fused(fused_dir);
  Json doc;
  if (fused.radiance) {
    const ToneMapped t = tonemap_output(*fused.radiance, ToneMode::mu_law, cfg.mu, cfg.bracket.gamma);
    io::write_pnm(dir / "tonemapped.ppm", to_codes(t.image));
    doc = {{"mode", to_string(ToneMode::mu_law)}, {"mu", cfg.mu}, {"peak", t.peak}};
  } else {
    io::write_pnm(dir / "tonemapped.ppm", to_codes(*fused.display));
    doc = {{"mode", "display"}, {"gamma", cfg.bracket.gamma}};
  }
  io::write_json(dir / "tonemapped.json", doc);
}

// ---------------------------------------------------------------------------
// Evaluation

struct MetricReport {
  std::string domain;  // "radiance" or "display"
  double mu = kDefaultMu;
  double peak = 0.0;   // ground-truth peak radiance
  std::vector<std::pair<std::string, double>> values;

  std::optional<double> get(std::string_view key) const {
    for (const auto& [k, v] : values)
      if (k == key) return v;
    return std::nullopt;
  }
};

inline double truth_peak(const Image<float>& truth) {
  double peak = 0.0;
  for (float v : truth.samples()) peak = std::max(peak, static_cast<double>(v));
  require(peak > 0.0, ErrorCategory::validation, "ground-truth radiance is all zero");
  return peak;
}

/// Radiance estimate against radiance truth. PSNR and SSIM use the truth
/// peak; the mu-law metrics and Charbonnier use the peak-normalized mu-law
/// pair.
inline MetricReport evaluate_radiance(const RadianceImage& estimate, const RadianceImage& truth,
                                      double mu, const MetricsConfig& toggles = {}) {
  MetricReport r{"radiance", mu, truth_peak(truth.pixels()), {}};
  const auto& e = estimate.pixels();
  const auto& t = truth.pixels();
  if (toggles.psnr) r.values.emplace_back("psnr", psnr(e, t, r.peak));
  if (toggles.ssim) r.values.emplace_back("ssim", ssim(e, t, r.peak));
  if (toggles.mu_psnr || toggles.mu_ssim || toggles.charbonnier) {
    const MuLawPair pair = mu_law_pair(e, t, mu);
    if (toggles.mu_psnr) r.values.emplace_back("mu_psnr", psnr(pair.estimate, pair.truth, 1.0));
    if (toggles.mu_ssim) r.values.emplace_back("mu_ssim", ssim(pair.estimate, pair.truth, 1.0));
    if (toggles.charbonnier) r.values.emplace_back("charbonnier", charbonnier(pair.estimate, pair.truth));
  }
  return r;
}

/// Display-referred estimate (exposure fusion) against the truth normalized
/// by its peak and gamma-encoded.
inline MetricReport evaluate_display(const NormalizedImage& estimate, const RadianceImage& truth,
                                     double mu, double gamma, const MetricsConfig& toggles = {}) {
  require_domain(estimate, Domain::gamma_encoded, "evaluate_display");
  const ToneMapped t = tonemap_output(truth, ToneMode::none, mu, gamma);
  MetricReport r{"display", mu, t.peak, {}};
  const auto& e = estimate.pixels();
  const auto& d = t.image.pixels();
  if (toggles.psnr) r.values.emplace_back("psnr", psnr(e, d, 1.0));
  if (toggles.ssim) r.values.emplace_back("ssim", ssim(e, d, 1.0));
  if (toggles.charbonnier) r.values.emplace_back("charbonnier", charbonnier(e, d));
  return r;
}

inline MetricReport evaluate_fused(const PipelineConfig& cfg, const FuseOutput& fused,
                                   const RadianceImage& truth) {
  return fused.radiance ? evaluate_radiance(*fused.radiance, truth, cfg.mu, cfg.metrics)
                        : evaluate_display(*fused.display, truth, cfg.mu, cfg.bracket.gamma, cfg.metrics);
}

inline Json metric_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline Json report_to_json(const MetricReport& r) {
  Json j;
  j["domain"] = r.domain;
  j["mu"] = r.mu;
  j["peak"] = r.peak;
  for (const auto& [k, v] : r.values) j[k] = metric_value(v);
  return j;
}

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return Json(v).dump();
}

/// One "key: value" line per entry, header first.
inline std::string report_to_text(const MetricReport& r) {
  std::string out = "domain: " + r.domain + "\nmu: " + format_number(r.mu) +
                    "\npeak: " + format_number(r.peak) + "\n";
  for (const auto& [k, v] : r.values) out += k + ": " + format_number(v) + "\n";
  return out;
}

inline void write_report(const fs::path& dir, const MetricReport& r) {
  io::write_file(dir / "metrics.txt", report_to_text(r));
  io::write_json(dir / "metrics.json", report_to_json(r));
}

// ---------------------------------------------------------------------------
// Manifest

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCategory::numeric, "SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

/// SHA-256 of every regular file under `root` except `skip`, keyed by the
/// generic relative path, in sorted order.
inline Json hash_tree(const fs::path& root, const fs::path& skip) {
  std::map<std::string, std::string> hashes;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path() == skip) continue;
    hashes[fs::relative(entry.path(), root).generic_string()] = sha256_hex(io::read_file(entry.path()));
  }
  Json out = Json::object();
  for (const auto& [k, v] : hashes) out[k] = v;
  return out;
}

struct PipelineResult {
  MetricReport result;
  std::optional<MetricReport> baseline;
};

/// scene -> degrade -> events -> deblur -> align -> fuse -> tonemap ->
/// evaluate, each stage through its files, then the manifest.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const RunLayout run{cfg.output};
  for (const fs::path& p : {run.scene(), run.ldr(), run.events().parent_path(), run.deblurred(),
                            run.aligned(), run.fused(), run.tonemapped(), run.evaluation(),
                            run.baseline(), run.manifest()})
    fs::remove_all(p);
  fs::create_directories(run.root);

  simulate_scene(cfg, run.scene());
  degrade(cfg, run.scene(), run.ldr());
  simulate_events_stage(cfg, run.scene(), run.events());
  deblur(cfg, run.ldr(), run.events(), run.deblurred());
  align(cfg, run.deblurred(), run.events(), run.aligned());
  fuse(cfg, run.aligned(), run.fused());
  tonemap(cfg, run.fused(), run.tonemapped());

  const RadianceImage truth = io::read_radiance(run.truth());
  PipelineResult res{evaluate_fused(cfg, load_fused(run.fused()), truth), std::nullopt};
  write_report(run.evaluation(), res.result);
  if (cfg.metrics.baseline) {
    naive_merge(cfg, run.ldr(), run.baseline());
    res.baseline = evaluate_fused(cfg, load_fused(run.baseline()), truth);
    write_report(run.baseline(), *res.baseline);
  }

  Json manifest;
  manifest["tool"] = "eshdr";
  manifest["version"] = ESHDR_VERSION;
  manifest["config"] = config_to_json(cfg);
  manifest["seeds"] = {{"motion", cfg.seed}, {"background", cfg.seed}, {"noise", cfg.seed}};
  manifest["stages"] = {"simulate-scene", "degrade",  "simulate-events", "deblur",
                        "align",          "fuse",     "tonemap",         "evaluate"};
  manifest["metrics"] = {{"result", report_to_json(res.result)}};
  if (res.baseline) manifest["metrics"]["baseline"] = report_to_json(*res.baseline);
  manifest["files"] = hash_tree(run.root, run.manifest());
  io::write_json(run.manifest(), manifest);
  return res;
}

}  // namespace eshdr::pipeline
