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
// Acceptance runner: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "eshdr/pipeline.hpp"
#include "support/harness.hpp"

namespace {

namespace fs = std::filesystem;
using namespace eshdr;
using Clock = std::chrono::steady_clock;

// Tolerances.
constexpr int kOracleSequences = 50;
constexpr double kOracleSeconds = 5.0;
constexpr double kGammaRoundTrip = 1e-12;
constexpr int kNoiseDraws = 100'000;
constexpr double kNoiseVarianceTolerance = 0.05;
constexpr double kDeblurMuPsnr = 35.0;
constexpr double kShiftEpe = 0.25;
constexpr double kClippedEpeWith = 1.0;
constexpr double kClippedEpeWithout = 2.0;
constexpr double kFusionRelativeError = 0.01;
constexpr double kFusionMuPsnr = 50.0;
constexpr double kPipelineGain = 6.0;
constexpr double kPipelineSeconds = 30.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

// 1. Simulator against the brute-force crossing enumerator.
Outcome event_oracle() {
  const auto t0 = Clock::now();
  std::size_t events = 0, mismatched = 0;
  for (int s = 0; s < kOracleSequences; ++s) {
    const auto seq = testing::random_sequence(8, 8, 10, 1000 + static_cast<std::uint64_t>(s), 10'000);
    const auto stream = simulate_events(seq);
    const auto expected = testing::enumerate_events(seq, 0.2, 1e-4);
    events += expected.size();
    if (stream.events() != expected) ++mismatched;
  }
  const double dt = seconds_since(t0);
  return {mismatched == 0 && dt < kOracleSeconds,
          fmt("%.0f sequences, %.0f events, %.0f mismatched sequences, %.2f s", kOracleSequences,
              static_cast<double>(events), static_cast<double>(mismatched), dt)};
}

// 2. Integrated polarity tracks the log change from the first frame.
Outcome integration_bound() {
  std::vector<std::vector<TimedFrame>> suite;
  for (int s = 0; s < kOracleSequences; ++s)
    suite.push_back(testing::random_sequence(8, 8, 10, 1000 + static_cast<std::uint64_t>(s), 10'000));
  SceneSpec scene;
  scene.background = RadianceImage(testing::textured_radiance(64, 64, 3, 9, 8.0, 1.0));
  scene.motion_bound = 1.0;
  scene.alpha_smooth = 0.9;
  scene.frame_count = 40;
  scene.crop = std::pair{48, 48};
  suite.push_back(render_sequence(scene));

  std::size_t checks = 0, violations = 0;
  double worst = 0.0;
  for (const auto& seq : suite) {
    const EventSimConfig cfg;
    const EventIndex index(simulate_events(seq, cfg));
    const int w = seq[0].image.width(), h = seq[0].image.height();
    auto log_mean = [&](const TimedFrame& f, int x, int y) {
      const auto& px = f.image.pixels();
      double acc = 0.0;
      for (int c = 0; c < px.channels(); ++c) acc += px(x, y, c);
      return std::log(std::max(acc / px.channels(), cfg.log_floor));
    };
    for (std::size_t k = 1; k < seq.size(); ++k) {
      const auto pred = predict_log_change(index, seq[0].timestamp, seq[k].timestamp);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double err = std::abs(pred(x, y) - (log_mean(seq[k], x, y) - log_mean(seq[0], x, y)));
          worst = std::max(worst, err / cfg.contrast_threshold);
          ++checks;
          if (!(err < cfg.contrast_threshold)) ++violations;
        }
    }
  }
  return {violations == 0, fmt("%.0f checks, %.0f violations, worst |error|/c = %.4f",
                               static_cast<double>(checks), static_cast<double>(violations), worst)};
}

// 3. Transfer functions.
Outcome transfer_round_trips() {
  double worst = 0.0;
  for (int i = 0; i < 1024; ++i) {
    const double v = i / 1023.0;
    worst = std::max(worst, std::abs(gamma_encode(gamma_decode(v, kDefaultGamma), kDefaultGamma) - v));
    worst = std::max(worst, std::abs(gamma_decode(gamma_encode(v, kDefaultGamma), kDefaultGamma) - v));
  }
  Image<float> px(64, 64, 3);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  for (float& v : px.samples()) v = u(rng);
  const NormalizedImage img(px, Domain::gamma_encoded);
  const bool identity = exposure_align(img, 0.0064, 0.0064) == img;
  const bool endpoints = mu_law(0.0, kDefaultMu) == 0.0 && mu_law(1.0, kDefaultMu) == 1.0;
  return {worst <= kGammaRoundTrip && identity && endpoints,
          fmt("gamma worst %.3g, align identity %.0f, mu-law endpoints %.0f", worst, identity, endpoints)};
}

// 4. Sample variance of the noise model.
Outcome noise_statistics() {
  BracketSpec spec;
  spec.seed = 4;
  bool ok = true;
  std::string detail;
  std::uint64_t frame = 0;
  for (double e : {0.0, 0.0625, 0.25, 1.0}) {
    const Image<float> img(kNoiseDraws / 100, 100, 1, static_cast<float>(e));
    const Image<float> noisy = add_noise(img, spec, frame++);
    double acc = 0.0;
    for (float v : noisy.samples()) acc += (v - e) * (v - e);
    const double var = acc / (kNoiseDraws - 1);
    const double expected = spec.noise_a * e + spec.noise_b;
    const double rel = std::abs(var / expected - 1.0);
    ok = ok && rel <= kNoiseVarianceTolerance;
    detail += fmt("e=%.4g rel.err %.4f; ", e, rel);
  }
  return {ok, detail};
}

// 5. Event-based deblur.
Outcome deblur() {
  const auto edge = testing::deblur_edge_harness();

  SceneSpec scene;
  scene.background = RadianceImage(testing::textured_radiance(40, 40, 3, 5, 6.0, 0.5));
  scene.motion_bound = 0.0;
  BracketSpec bracket;
  bracket.noise_a = bracket.noise_b = 0.0;
  scene.frame_count = make_schedule(bracket).frames_required;
  const auto frames = render_sequence(scene);
  const auto degraded = degrade_bracket(frames, bracket);
  const EventIndex index(simulate_events(frames));
  bool unchanged = true;
  for (const auto& f : degraded.frames)
    unchanged = unchanged &&
                edi_deblur(f, index, pipeline::deblur_target(f.info(), degraded.schedule.reference_time)).image ==
                    to_normalized(f);
  return {edge.deblurred_mu_psnr >= kDeblurMuPsnr && unchanged,
          fmt("edge mu-PSNR %.2f dB (blurred %.2f dB), static unchanged %.0f", edge.deblurred_mu_psnr,
              edge.blurred_mu_psnr, unchanged)};
}

// 6. Alignment on global shifts, and event assistance in clipped regions.
Outcome alignment() {
  double worst = 0.0;
  for (Vec2 s : {Vec2{0.0, 0.0}, Vec2{1.5, -0.5}, Vec2{3.0, 2.0}, Vec2{-4.25, 3.75}, Vec2{8.0, 0.0},
                 Vec2{0.0, -8.0}, Vec2{-5.5, -5.5}})
    worst = std::max(worst, testing::align_shift_scene(testing::shift_scene(s, false), 1.0).valid_epe.mean);
  const auto clipped = testing::shift_scene({4.0, 0.0}, true);
  const double with = testing::align_shift_scene(clipped, 1.0).bright_epe.mean;
  const double without = testing::align_shift_scene(clipped, 0.0).bright_epe.mean;
  return {worst <= kShiftEpe && with <= kClippedEpeWith && without > kClippedEpeWithout,
          fmt("worst shift EPE %.3f px; clipped EPE lambda_ev=1 %.3f px, lambda_ev=0 %.3f px", worst, with,
              without)};
}

// 7. Static noiseless bracket through the radiance merge.
Outcome fusion_round_trip() {
  SceneSpec scene;
  scene.background = RadianceImage(testing::textured_radiance(64, 64, 3, 21, 12.0, 8.0));
  scene.motion_bound = 0.0;
  BracketSpec bracket;
  bracket.noise_a = bracket.noise_b = 0.0;
  bracket.anchor = 1.0 / bracket.base_exposure;
  scene.frame_count = make_schedule(bracket).frames_required;
  const auto degraded = degrade_bracket(render_sequence(scene), bracket);

  std::vector<ExposedImage> frames;
  for (std::size_t n = 0; n < degraded.frames.size(); ++n)
    frames.push_back({to_normalized(degraded.frames[n]), degraded.schedule.slots[n].ev});
  Image<float> merged = debevec_merge(frames).pixels();
  for (float& v : merged.samples()) v = static_cast<float>(v / (bracket.anchor * bracket.base_exposure));
  const auto truth = degraded.truth.hdr.pixels().samples();
  const auto est = merged.samples();

  // floor: samples where even the best unclipped frame's half-code step
  // exceeds the tolerance, so no weighting could meet it.
  double worst = 0.0;
  std::size_t counted = 0, over = 0, floor = 0, over_at_floor = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    double best_step = std::numeric_limits<double>::infinity();
    for (const auto& f : degraded.frames) {
      const std::uint8_t code = f.codes().samples()[i];
      if (code > 0 && code < 255) best_step = std::min(best_step, kDefaultGamma * 0.5 / code);
    }
    if (!std::isfinite(best_step)) continue;
    const double rel = std::abs(est[i] - truth[i]) / truth[i];
    worst = std::max(worst, rel);
    ++counted;
    if (rel > kFusionRelativeError) ++over;
    if (best_step > kFusionRelativeError) ++floor;
    if (best_step > kFusionRelativeError && rel > kFusionRelativeError) ++over_at_floor;
  }
  const double mp = mu_psnr(merged, degraded.truth.hdr.pixels());
  return {over == 0 && mp >= kFusionMuPsnr,
          fmt("worst relative error %.4f over %.0f samples, %.0f above 1%%", worst, static_cast<double>(counted),
              static_cast<double>(over)) +
              fmt(" (%.0f of %.0f samples whose half-code step exceeds 1%% in every unclipped frame)",
                  static_cast<double>(over_at_floor), static_cast<double>(floor)) +
              fmt(", mu-PSNR %.2f dB", mp)};
}

struct Command {
  int status = -1;
  std::string output;
};

Command run_cli(const std::string& args) {
  Command c;
  FILE* pipe = popen((std::string(ESHDR_CLI_PATH) + " " + args + " 2>&1").c_str(), "r");
  if (!pipe) return c;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) c.output += buf;
  const int raw = pclose(pipe);
  c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return c;
}

// 64x64 procedural scene, smoothed translation, noiseless.
constexpr const char* kDynamicConfig = R"({
  "seed": 0,
  "scene": {"width": 64, "height": 64, "alpha_smooth": 0.99, "motion_bound": 2.0,
            "background_stops": 12, "background_mid_gray": 0.18},
  "bracket": {"noise_a": 0.0, "noise_b": 0.0}
})";

struct DynamicRun {
  fs::path root;
  fs::path config;
  Command first;
  double seconds = 0.0;
};

DynamicRun& dynamic_run() {
  static DynamicRun run = [] {
    DynamicRun r;
    r.root = fs::temp_directory_path() / "eshdr_acceptance";
    fs::remove_all(r.root);
    r.config = r.root / "dynamic.json";
    io::write_file(r.config, kDynamicConfig);
    const auto t0 = Clock::now();
    r.first = run_cli("pipeline --config " + r.config.string() + " --out " + (r.root / "run").string() +
                      " --threads 1");
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

// 8. End-to-end gain over the naive merge.
Outcome dynamic_pipeline() {
  const DynamicRun& r = dynamic_run();
  if (r.first.status != 0) return {false, "pipeline failed: " + r.first.output};
  const io::Json metrics = io::read_json(r.root / "run" / "manifest.json").at("metrics");
  const double result = metrics.at("result").at("mu_psnr").get<double>();
  const double naive = metrics.at("baseline").at("mu_psnr").get<double>();
  return {result - naive >= kPipelineGain && r.seconds < kPipelineSeconds,
          fmt("mu-PSNR %.2f dB vs naive %.2f dB (gain %.2f dB), %.2f s single-threaded", result, naive,
              result - naive, r.seconds)};
}

// Every file of a run directory, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).generic_string()] = io::read_file(entry.path());
  return files;
}

// 9. Reruns and thread counts reproduce every byte.
Outcome determinism() {
  const DynamicRun& r = dynamic_run();
  if (r.first.status != 0) return {false, "pipeline failed"};
  const fs::path out = r.root / "run";
  const auto reference = snapshot(out);
  std::string detail;
  bool ok = true;
  for (const char* threads : {"1", "4", "0"}) {
    const Command c = run_cli("pipeline --config " + r.config.string() + " --out " + out.string() +
                              " --threads " + threads);
    const bool same = c.status == 0 && snapshot(out) == reference;
    ok = ok && same;
    detail += std::string("--threads ") + threads + (same ? " identical; " : " DIFFERS; ");
  }
  detail += std::to_string(reference.size()) + " files compared";
  return {ok, detail};
}

template <typename F>
bool io_error(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category() == ErrorCategory::io;
  }
  return false;
}

// 10. Writers and readers round-trip; corrupt headers are io errors.
Outcome format_fidelity() {
  Image<float> px(37, 21, 3);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<float> u(-1e6f, 1e6f);
  for (float& v : px.samples()) v = u(rng);
  px(0, 0, 0) = std::numeric_limits<float>::denorm_min();
  px(1, 0, 0) = -0.0f;
  const std::string pfm = io::encode_pfm(px);
  const bool pfm_ok = io::decode_pfm(pfm) == px && io::encode_pfm(io::decode_pfm(pfm)) == pfm;

  const auto seq = testing::random_sequence(16, 12, 12, 3, 1000);
  EventStream stream = simulate_events(seq);
  const std::string ev = io::encode_events(stream);
  const bool ev_ok = io::decode_events(ev) == stream && io::encode_events(io::decode_events(ev)) == ev;

  std::string bad_magic = ev, bad_version = ev;
  bad_magic[5] = '2';
  bad_version[8] = 9;
  std::string bad_pfm = pfm;
  bad_pfm[1] = 'x';
  const bool errors = io_error([&] { io::decode_events(bad_magic); }) &&
                      io_error([&] { io::decode_events(bad_version); }) &&
                      io_error([&] { io::decode_events(std::string_view(ev).substr(0, ev.size() - 3)); }) &&
                      io_error([&] { io::decode_events(std::string_view(ev).substr(0, 20)); }) &&
                      io_error([&] { io::decode_pfm(bad_pfm); }) &&
                      io_error([&] { io::decode_pfm(std::string_view(pfm).substr(0, pfm.size() - 1)); }) &&
                      io_error([&] { io::decode_pfm("PF\n-3 2\n-1.0\n"); });
  return {pfm_ok && ev_ok && errors,
          fmt("PFM bit-exact %.0f, ESHDR1 bit-exact %.0f (%.0f events), corruptions categorized %.0f", pfm_ok,
              ev_ok, static_cast<double>(stream.size()), errors)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"event oracle equivalence", event_oracle},
      {"event integration bound", integration_bound},
      {"transfer round trips", transfer_round_trips},
      {"noise statistics", noise_statistics},
      {"event deblur", deblur},
      {"alignment", alignment},
      {"fusion round trip", fusion_round_trip},
      {"dynamic pipeline", dynamic_pipeline},
      {"determinism", determinism},
      {"format fidelity", format_fidelity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("C%zu %s %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(fs::temp_directory_path() / "eshdr_acceptance");
  return failed;
}
