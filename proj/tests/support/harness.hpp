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
#include <vector>

#include "eshdr/align.hpp"
#include "eshdr/deblur.hpp"
#include "eshdr/degrade.hpp"
#include "eshdr/eventsim.hpp"
#include "eshdr/metrics.hpp"
#include "eshdr/scenesim.hpp"
#include "support/synthetic.hpp"

namespace eshdr::testing {

inline Image<float> linearize(const NormalizedImage& img, double gamma = kDefaultGamma) {
  if (img.domain() == Domain::linear) return img.pixels();
  return gamma_decode(img, gamma).pixels();
}

inline Image<float> linearize(const LdrFrame& frame, double gamma = kDefaultGamma) {
  return linearize(to_normalized(frame), gamma);
}

struct DeblurHarness {
  double deblurred_mu_psnr = 0.0;
  double blurred_mu_psnr = 0.0;
  std::size_t event_count = 0;
};

/// 64x64 step edge over a mild texture, translating 1 px per HDR sample,
/// exposed over K = 8 samples without noise. The sharp reference is the
/// clean capture at the exposure's reference instant.
inline DeblurHarness deblur_edge_harness(std::uint64_t seed = 1) {
  constexpr int kSize = 64;
  constexpr int kBlur = 8;
  Image<float> bg = textured_radiance(kSize + 40, kSize + 40, 3, seed, 1.0, 1.0);
  for (int y = 0; y < bg.height(); ++y)
    for (int x = 0; x < bg.width(); ++x)
      for (int c = 0; c < 3; ++c) bg(x, y, c) *= x < bg.width() / 2 ? 0.08f : 0.7f;

  BracketSpec bracket;
  bracket.evs = {0.0};
  bracket.base_exposure = kBlur * 1e-4;
  bracket.anchor = 1.0 / bracket.base_exposure;
  bracket.noise_a = bracket.noise_b = 0.0;
  const auto schedule = make_schedule(bracket);

  SceneSpec scene;
  scene.background = RadianceImage(bg);
  scene.frame_count = schedule.frames_required;
  scene.frame_interval = bracket.frame_interval;
  scene.crop = std::pair{kSize, kSize};
  const SceneRenderer renderer(scene, constant_trajectory(scene.frame_count, {1.0, 0.0}),
                               constant_trajectory(scene.frame_count, {}));
  const auto frames = render_sequence(renderer);
  const auto degraded = degrade_bracket(frames, bracket);
  const auto stream = simulate_events(frames);

  const auto result = edi_deblur(degraded.frames[0], stream, schedule.reference_time);
  const Image<float> truth = linearize(degraded.truth.sharp[0]);
  return {mu_psnr(linearize(result.image), truth), mu_psnr(linearize(degraded.frames[0]), truth),
          stream.size()};
}

/// Bilinear crop of `canvas` with its top-left corner at (ox, oy).
inline Image<float> shifted_crop(const Image<float>& canvas, double ox, double oy, int w, int h) {
  Image<float> out(w, h, canvas.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < canvas.channels(); ++c)
        out(x, y, c) = static_cast<float>(bilinear_sample(canvas, ox + x, oy + y, c));
  return out;
}

/// Two crops of one HDR canvas plus an event stream in which each crop
/// jitters around a small circle during its own window. The source crop is
/// offset by -shift, so the true backward flow from reference to source is
/// `shift` everywhere.
struct ShiftScene {
  LdrFrame source;
  LdrFrame reference;
  EventStream stream;
  EventWindow source_window;
  EventWindow reference_window;
  Image<std::uint8_t> bright;  // reference pixels whose source match lies in the bright half
  Vec2 shift;
};

inline ShiftScene shift_scene(Vec2 shift, bool clipped, std::uint64_t seed = 3, int size = 128) {
  constexpr int kMargin = 16;
  constexpr int kSteps = 16;
  constexpr double kRadius = 2.0;
  constexpr TimeNs kDt = 10'000;
  const int cw = size + 2 * kMargin;
  Image<float> canvas = textured_radiance(cw, cw, 3, seed, 3.0, 0.9);
  const double ev_source = clipped ? 6.0 : 0.0;
  if (clipped)
    for (int y = 0; y < cw; ++y)
      for (int x = 0; x < cw; ++x)
        for (int c = 0; c < 3; ++c)
          if (x < cw / 2) canvas(x, y, c) /= 75.0f;

  const Vec2 ref_origin{static_cast<double>(kMargin), static_cast<double>(kMargin)};
  const Vec2 src_origin{kMargin - shift.x, kMargin - shift.y};
  std::vector<TimedFrame> seq;
  TimeNs t = 0;
  auto window = [&](Vec2 origin) {
    const TimeNs start = t;
    for (int j = 0; j <= kSteps; ++j) {
      const double a = 2.0 * 3.141592653589793 * j / kSteps;
      seq.push_back({RadianceImage(shifted_crop(canvas, origin.x + kRadius * std::cos(a),
                                                origin.y + kRadius * std::sin(a), size, size)),
                     t});
      t += kDt;
    }
    t += kDt;
    return EventWindow{start, kSteps * kDt};
  };
  const EventWindow src_window = window(src_origin);
  const EventWindow ref_window = window(ref_origin);
  EventStream stream = simulate_events(seq);

  auto capture = [&](Vec2 origin, double ev, EventWindow w) {
    Image<float> e = shifted_crop(canvas, origin.x, origin.y, size, size);
    for (float& v : e.samples()) v = static_cast<float>(v * std::exp2(ev));
    return quantize(e, {ev, static_cast<double>(w.duration) * 1e-9 * std::exp2(ev), w.start});
  };
  ShiftScene out{capture(src_origin, ev_source, src_window), capture(ref_origin, 0.0, ref_window),
                 std::move(stream), src_window, ref_window, Image<std::uint8_t>(size, size, 1), shift};
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) out.bright(x, y) = ref_origin.x + x >= cw / 2 ? 1 : 0;
  return out;
}

struct AlignOutcome {
  FlowField flow;
  EpeResult valid_epe;   // over pixels the estimator marks valid
  EpeResult bright_epe;  // over every pixel of the bright region
};

inline AlignOutcome align_shift_scene(const ShiftScene& scene, double lambda_ev) {
  const auto src = to_normalized(scene.source);
  const auto ref = exposure_align(to_normalized(scene.reference), scene.source.info().exposure_time,
                                  scene.reference.info().exposure_time);
  const EventIndex index(scene.stream);
  const auto channels = build_alignment_channels(src, ref, scene.stream, index,
                                                 scene.source_window, scene.reference_window);
  FlowParams params;
  params.lambda_ev = lambda_ev;
  AlignOutcome out{estimate_flow(channels.first, channels.second, params), {}, {}};
  const FlowField gt = constant_flow(src.width(), src.height(), scene.shift.x, scene.shift.y);
  out.valid_epe = flow_epe(out.flow, gt);
  FlowField all = out.flow;
  for (auto& v : all.valid.samples()) v = 1;
  out.bright_epe = flow_epe(all, gt, &scene.bright);
  return out;
}

}  // namespace eshdr::testing
