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
#include <string>

#include "eshdr/events.hpp"
#include "eshdr/image.hpp"
#include "eshdr/parallel.hpp"
#include "eshdr/transfer.hpp"

namespace eshdr {

/// Event double integral for one pixel: the mean over the exposure window
/// [start, end) of exp(c * N(s)), where N(s) is the signed event count
/// between target and s. N is piecewise constant between events, so the
/// integral is an exact sum over those segments.
inline double edi_denominator(std::span<const TimeNs> times, std::span<const std::int8_t> polarity,
                              double c, TimeNs start, TimeNs end, TimeNs target) {
  const auto first = std::lower_bound(times.begin(), times.end(), start);
  const auto last = std::lower_bound(first, times.end(), end);
  if (first == last) return 1.0;
  const auto lo = static_cast<std::size_t>(first - times.begin());
  const auto hi = static_cast<std::size_t>(last - times.begin());

  // Running count from the window start; N(s) = count(s) - count(target).
  std::int64_t at_target = 0;
  for (std::size_t i = lo; i < hi && times[i] < target; ++i) at_target += polarity[i];

  double integral = 0.0;
  std::int64_t count = 0;
  TimeNs seg_start = start;
  for (std::size_t i = lo; i <= hi; ++i) {
    const TimeNs seg_end = i < hi ? times[i] : end;
    if (seg_end > seg_start)
      integral += static_cast<double>(seg_end - seg_start) *
                  std::exp(c * static_cast<double>(count - at_target));
    if (i < hi) count += polarity[i];
    seg_start = seg_end;
  }
  return integral / static_cast<double>(end - start);
}

/// Per-pixel EDI denominators for the window [start, end) and target instant.
inline Image<double> edi_denominators(const EventIndex& events, TimeNs start, TimeNs end,
                                      TimeNs target) {
  require(end > start, ErrorCategory::validation, "exposure window is empty");
  require(target >= start && target <= end, ErrorCategory::validation,
          "deblur target " + std::to_string(target) + " ns outside the exposure window [" +
              std::to_string(start) + ", " + std::to_string(end) + "]");
  Image<double> out(events.width(), events.height(), 1);
  const double c = events.contrast_threshold();
  parallel_for(0, out.height(), [&](std::ptrdiff_t yi) {
    const int y = static_cast<int>(yi);
    for (int x = 0; x < out.width(); ++x) {
      const std::size_t p = events.pixel(x, y);
      out(x, y) = edi_denominator(events.times(p), events.polarities(p), c, start, end, target);
    }
  });
  return out;
}

/// Linear-domain EDI: latent(target) = blurred / denominator, unclipped.
inline Image<float> edi_latent(const Image<float>& blurred_linear, const EventIndex& events,
                               TimeNs start, TimeNs end, TimeNs target) {
  require(blurred_linear.width() == events.width() && blurred_linear.height() == events.height(),
          ErrorCategory::validation, "blurred frame and event sensor differ in size");
  const Image<double> denom = edi_denominators(events, start, end, target);
  Image<float> out = blurred_linear;
  const int ch = out.channels();
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      for (int k = 0; k < ch; ++k) out(x, y, k) = static_cast<float>(out(x, y, k) / denom(x, y));
  return out;
}

struct DeblurResult {
  NormalizedImage image;       // gamma-encoded
  Image<std::uint8_t> valid;   // 0 where any channel was saturated (code 0 or 255)
};

/// Sharp latent frame at target_t from a blurred LDR capture and the events
/// recorded during its exposure. Saturated samples pass through unchanged.
inline DeblurResult edi_deblur(const LdrFrame& blurred, const EventIndex& events, TimeNs target,
                               double gamma = kDefaultGamma) {
  const CaptureInfo& info = blurred.info();
  const auto& codes = blurred.codes();
  require(codes.width() == events.width() && codes.height() == events.height(),
          ErrorCategory::validation, "blurred frame and event sensor differ in size");
  const Image<double> denom = edi_denominators(events, info.timestamp, info.end(), target);

  Image<float> encoded(codes.width(), codes.height(), codes.channels());
  Image<std::uint8_t> valid(codes.width(), codes.height(), 1, 1);
  const int ch = codes.channels();
  for (int y = 0; y < codes.height(); ++y) {
    for (int x = 0; x < codes.width(); ++x) {
      const double d = denom(x, y);
      for (int k = 0; k < ch; ++k) {
        const std::uint8_t code = codes(x, y, k);
        if (code == 0 || code == 255 || d == 1.0) {
          encoded(x, y, k) = static_cast<float>(code) / 255.0f;
          if (code == 0 || code == 255) valid(x, y) = 0;
        } else {
          const double latent = std::pow(code / 255.0, gamma) / d;
          encoded(x, y, k) = static_cast<float>(std::pow(std::clamp(latent, 0.0, 1.0), 1.0 / gamma));
        }
      }
    }
  }
  return {NormalizedImage(std::move(encoded), Domain::gamma_encoded), std::move(valid)};
}

inline DeblurResult edi_deblur(const LdrFrame& blurred, const EventStream& stream, TimeNs target,
                               double gamma = kDefaultGamma) {
  return edi_deblur(blurred, EventIndex(stream), target, gamma);
}

/// Exposure midpoint, the default deblur target.
inline TimeNs exposure_midpoint(const CaptureInfo& info) {
  return info.timestamp + (info.end() - info.timestamp) / 2;
}

}  // namespace eshdr
