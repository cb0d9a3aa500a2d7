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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "eshdr/eventsim.hpp"
#include "eshdr/image.hpp"
#include "eshdr/parallel.hpp"
#include "eshdr/random.hpp"
#include "eshdr/transfer.hpp"

namespace eshdr {

struct BracketSpec {
  std::vector<double> evs{-6.0, -3.0, 0.0, 3.0, 6.0};
  double base_exposure = 6.4e-3;  // seconds at 0 EV
  double anchor = 1.0;            // sensor exposure per unit radiance-second
  TimeNs frame_interval = 100'000;
  double noise_a = 1e-3;
  double noise_b = 1e-5;
  std::uint64_t seed = 0;
  TimeNs readout_gap = 0;
  double gamma = kDefaultGamma;

  void validate() const {
    require(!evs.empty(), ErrorCategory::validation, "bracket has no exposures");
    for (std::size_t i = 0; i < evs.size(); ++i) {
      require(std::isfinite(evs[i]), ErrorCategory::validation, "EV must be finite");
      if (i > 0)
        require(evs[i] > evs[i - 1], ErrorCategory::validation, "EVs must be strictly increasing");
    }
    require(std::find(evs.begin(), evs.end(), 0.0) != evs.end(), ErrorCategory::validation,
            "bracket must contain the 0 EV reference");
    require(std::isfinite(base_exposure) && base_exposure > 0.0, ErrorCategory::validation,
            "base exposure must be positive");
    require(std::isfinite(anchor) && anchor > 0.0, ErrorCategory::validation,
            "anchor must be positive");
    require(frame_interval > 0, ErrorCategory::validation, "frame interval must be positive");
    require(noise_a >= 0.0 && noise_b >= 0.0, ErrorCategory::validation,
            "noise coefficients must be non-negative");
    require(readout_gap >= 0, ErrorCategory::validation, "readout gap must be non-negative");
    require(gamma > 0.0, ErrorCategory::validation, "gamma must be positive");
  }

  std::size_t reference_index() const {
    return static_cast<std::size_t>(std::find(evs.begin(), evs.end(), 0.0) - evs.begin());
  }

  /// Nominal exposure time base_exposure * 2^ev in seconds.
  double exposure_time(double ev) const { return base_exposure * std::exp2(ev); }

  /// Number of HDR samples averaged for one exposure.
  std::size_t frames_per_exposure(double ev) const {
    const double k = std::round(exposure_time(ev) * 1e9 / static_cast<double>(frame_interval));
    require(k >= 1.0, ErrorCategory::validation,
            "exposure at " + std::to_string(ev) + " EV is shorter than half a frame interval");
    return static_cast<std::size_t>(k);
  }
};

/// One capture of the bracket. Sample k of the HDR sequence stands for the
/// interval of one frame_interval centred on its timestamp, so an exposure
/// averaging samples [first, first + count) spans
/// [t_first - interval/2, t_first - interval/2 + count * interval).
struct ExposureSlot {
  double ev = 0.0;
  std::size_t first = 0;
  std::size_t count = 0;
  TimeNs start = 0;
  TimeNs duration = 0;

  TimeNs end() const noexcept { return start + duration; }
};

struct BracketSchedule {
  std::vector<ExposureSlot> slots;
  std::size_t reference = 0;      // slot index of 0 EV
  std::size_t reference_frame = 0;  // HDR sample at the reference instant
  TimeNs reference_time = 0;
  std::size_t frames_required = 0;  // HDR samples needed, including one trailing sample
};

/// Sequential ascending captures, each starting when the previous one ends
/// plus the readout gap (rounded to whole frame intervals).
inline BracketSchedule make_schedule(const BracketSpec& spec) {
  spec.validate();
  BracketSchedule schedule;
  const TimeNs dt = spec.frame_interval;
  const auto gap_frames =
      static_cast<std::size_t>(std::llround(static_cast<double>(spec.readout_gap) / dt));
  std::size_t next = 1;
  for (double ev : spec.evs) {
    ExposureSlot slot;
    slot.ev = ev;
    slot.first = next;
    slot.count = spec.frames_per_exposure(ev);
    slot.start = static_cast<TimeNs>(slot.first) * dt - dt / 2;
    slot.duration = static_cast<TimeNs>(slot.count) * dt;
    schedule.slots.push_back(slot);
    next = slot.first + slot.count + gap_frames;
  }
  schedule.reference = spec.reference_index();
  const auto& ref = schedule.slots[schedule.reference];
  schedule.reference_frame = ref.first + ref.count / 2;
  schedule.reference_time = static_cast<TimeNs>(schedule.reference_frame) * dt;
  const auto& last = schedule.slots.back();
  schedule.frames_required = last.first + last.count + 1;
  return schedule;
}

/// Sensor exposure anchor * tau * mean(radiance) over the samples the
/// exposure covers, unclipped.
template <FrameSequence Sequence>
Image<float> expose(const Sequence& frames, std::size_t first, double ev,
                    const BracketSpec& spec) {
  const std::size_t count = spec.frames_per_exposure(ev);
  require(first + count <= frames.size(), ErrorCategory::validation,
          "exposure at " + std::to_string(ev) + " EV needs " + std::to_string(count) +
              " frames from index " + std::to_string(first) + ", sequence has " +
              std::to_string(frames.size()));
  std::vector<double> sum;
  int w = 0, h = 0, ch = 0;
  for (std::size_t k = first; k < first + count; ++k) {
    const auto& frame = frames[k];
    const auto& px = frame.image.pixels();
    if (sum.empty()) {
      w = px.width();
      h = px.height();
      ch = px.channels();
      sum.assign(px.size(), 0.0);
    }
    require(px.width() == w && px.height() == h && px.channels() == ch,
            ErrorCategory::validation, "HDR frames differ in shape");
    const auto src = px.samples();
    for (std::size_t i = 0; i < src.size(); ++i) sum[i] += src[i];
  }
  const double scale = spec.anchor * spec.exposure_time(ev);
  Image<float> out(w, h, ch);
  auto dst = out.samples();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = static_cast<float>(scale * (sum[i] / static_cast<double>(count)));
  return out;
}

/// Heteroscedastic Gaussian noise with variance noise_a * e + noise_b, keyed
/// by (seed, frame_index, sample index).
inline Image<float> add_noise(const Image<float>& exposure, const BracketSpec& spec,
                              std::uint64_t frame_index) {
  Image<float> out = exposure;
  if (spec.noise_a == 0.0 && spec.noise_b == 0.0) return out;
  auto dst = out.samples();
  const auto n = static_cast<std::ptrdiff_t>(dst.size());
  parallel_for(0, n, [&](std::ptrdiff_t i) {
    const double e = dst[static_cast<std::size_t>(i)];
    const double var = std::max(0.0, spec.noise_a * std::max(0.0, e) + spec.noise_b);
    const double z = keyed_normal(spec.seed, frame_index, static_cast<std::uint64_t>(i));
    dst[static_cast<std::size_t>(i)] = static_cast<float>(e + std::sqrt(var) * z);
  });
  return out;
}

/// Sensor exposure of one sample to its 8-bit code: clip to [0, 1],
/// gamma-encode, round half away from zero.
inline std::uint8_t quantize_sample(double exposure, double gamma = kDefaultGamma) {
  const double v = std::pow(std::clamp(exposure, 0.0, 1.0), 1.0 / gamma);
  return static_cast<std::uint8_t>(std::clamp(std::round(v * 255.0), 0.0, 255.0));
}

inline LdrFrame quantize(const Image<float>& exposure, const CaptureInfo& info,
                         double gamma = kDefaultGamma) {
  Image<std::uint8_t> codes(exposure.width(), exposure.height(), exposure.channels());
  const auto src = exposure.samples();
  auto dst = codes.samples();
  for (std::size_t i = 0; i < src.size(); ++i) {
    require(!std::isnan(src[i]), ErrorCategory::numeric, "exposure sample is NaN");
    dst[i] = quantize_sample(src[i], gamma);
  }
  return LdrFrame(std::move(codes), info);
}

struct GroundTruth {
  RadianceImage hdr;                   // HDR sample at the reference instant
  TimeNs reference_time = 0;
  std::size_t reference_frame = 0;
  std::vector<LdrFrame> sharp;         // clean single-sample LDR at every EV
};

struct DegradedBracket {
  std::vector<LdrFrame> frames;
  BracketSchedule schedule;
  GroundTruth truth;
};

template <FrameSequence Sequence>
DegradedBracket degrade_bracket(const Sequence& frames, const BracketSpec& spec) {
  DegradedBracket out;
  out.schedule = make_schedule(spec);
  require(frames.size() >= out.schedule.frames_required, ErrorCategory::validation,
          "bracket schedule needs " + std::to_string(out.schedule.frames_required) +
              " HDR frames, sequence has " + std::to_string(frames.size()));
  for (std::size_t k = 0; k < frames.size(); ++k)
    require(frames[k].timestamp == static_cast<TimeNs>(k) * spec.frame_interval,
            ErrorCategory::validation, "HDR frame timestamps do not match the frame interval");

  for (std::size_t n = 0; n < out.schedule.slots.size(); ++n) {
    const auto& slot = out.schedule.slots[n];
    const Image<float> e = expose(frames, slot.first, slot.ev, spec);
    const CaptureInfo info{slot.ev, static_cast<double>(slot.duration) * 1e-9, slot.start};
    out.frames.push_back(quantize(add_noise(e, spec, n), info, spec.gamma));
  }

  const auto& ref_frame = frames[out.schedule.reference_frame];
  out.truth.hdr = ref_frame.image;
  out.truth.reference_time = out.schedule.reference_time;
  out.truth.reference_frame = out.schedule.reference_frame;
  const auto& px = ref_frame.image.pixels();
  for (const auto& slot : out.schedule.slots) {
    const double scale = spec.anchor * spec.exposure_time(slot.ev);
    Image<float> e(px.width(), px.height(), px.channels());
    const auto src = px.samples();
    auto dst = e.samples();
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i] = static_cast<float>(scale * static_cast<double>(src[i]));
    const CaptureInfo info{slot.ev, static_cast<double>(slot.duration) * 1e-9,
                           out.schedule.reference_time};
    out.truth.sharp.push_back(quantize(e, info, spec.gamma));
  }
  return out;
}

}  // namespace eshdr
