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
#include <concepts>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "eshdr/events.hpp"
#include "eshdr/image.hpp"
#include "eshdr/parallel.hpp"

namespace eshdr {

/// An HDR sample together with its capture instant.
struct TimedFrame {
  RadianceImage image;
  TimeNs timestamp = 0;
};

/// Random-access frame source: an in-memory vector or a lazily loading
/// on-disk sequence.
template <typename S>
concept FrameSequence = requires(const S& s, std::size_t i) {
  { s.size() } -> std::convertible_to<std::size_t>;
  { s[i].image } -> std::convertible_to<const RadianceImage&>;
  { s[i].timestamp } -> std::convertible_to<TimeNs>;
};

struct EventSimConfig {
  double contrast_threshold = 0.2;
  double log_floor = 1e-4;
};

/// Ideal event sensor fed one HDR sample at a time.
///
/// Each pixel tracks a reference level on the lattice L0 + m*c, where L0 is
/// the log luminance of the first sample. Log luminance is linear in time
/// between samples; every lattice level the path reaches beyond the current
/// reference emits one event at the interpolated crossing time and moves
/// the reference by one step. Crossing times are rounded to the nearest
/// nanosecond and kept strictly inside (t_k, t_{k+1}).
class EventSimulator {
 public:
  explicit EventSimulator(EventSimConfig config = {}) : config_(config) {
    require(std::isfinite(config.contrast_threshold) && config.contrast_threshold > 0.0,
            ErrorCategory::validation, "contrast threshold must be positive");
    require(std::isfinite(config.log_floor) && config.log_floor > 0.0,
            ErrorCategory::validation, "log floor must be positive");
  }

  void push(const RadianceImage& frame, TimeNs t) {
    if (!initialized_) {
      initialize(frame, t);
      return;
    }
    require(frame.width() == width_ && frame.height() == height_, ErrorCategory::validation,
            "frame size changed during event simulation");
    require(t > last_t_, ErrorCategory::validation,
            "frame timestamps must strictly increase (" + std::to_string(last_t_) + " then " +
                std::to_string(t) + ")");
    const auto luminance = log_luminance(frame);
    const TimeNs t0 = last_t_;
    const TimeNs dt = t - t0;
    const double c = config_.contrast_threshold;

    std::vector<std::vector<Event>> rows(static_cast<std::size_t>(height_));
    parallel_for(0, height_, [&](std::ptrdiff_t yi) {
      const int y = static_cast<int>(yi);
      auto& out = rows[static_cast<std::size_t>(y)];
      for (int x = 0; x < width_; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * width_ + x;
        const double a = last_log_[p];
        const double b = luminance[p];
        std::int64_t& m = level_[p];
        TimeNs last_offset = 0;
        auto emit = [&](double level, std::int8_t polarity) {
          TimeNs offset = crossing_offset(level, a, b, dt);
          if (offset <= last_offset) offset = std::min(last_offset + 1, std::max<TimeNs>(dt - 1, 1));
          last_offset = offset;
          out.push_back(Event{t0 + offset, static_cast<std::uint16_t>(x),
                              static_cast<std::uint16_t>(y), polarity});
        };
        if (b > a) {
          for (double level = base_[p] + static_cast<double>(m + 1) * c; level <= b;
               level = base_[p] + static_cast<double>(m + 1) * c) {
            emit(level, 1);
            ++m;
          }
        } else if (b < a) {
          for (double level = base_[p] + static_cast<double>(m - 1) * c; level >= b;
               level = base_[p] + static_cast<double>(m - 1) * c) {
            emit(level, -1);
            --m;
          }
        }
        last_log_[p] = b;
      }
    });

    std::vector<Event> batch;
    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();
    batch.reserve(total);
    for (auto& r : rows) batch.insert(batch.end(), r.begin(), r.end());
    std::sort(batch.begin(), batch.end(), event_before);
    events_.insert(events_.end(), batch.begin(), batch.end());
    last_t_ = t;
  }

  std::size_t event_count() const noexcept { return events_.size(); }

  /// Hands over the stream; its span covers the first to last pushed sample.
  EventStream finish() && {
    require(initialized_, ErrorCategory::validation, "event simulation needs at least one frame");
    EventStream stream(width_, height_, config_.contrast_threshold, config_.log_floor,
                       std::move(events_));
    stream.set_span(first_t_, last_t_);
    return stream;
  }

  /// Offset of a level crossing within a segment of length dt, rounded to the
  /// nearest nanosecond and clamped into [1, dt - 1].
  static TimeNs crossing_offset(double level, double a, double b, TimeNs dt) noexcept {
    const double frac = (level - a) / (b - a);
    const auto offset = static_cast<TimeNs>(std::llround(frac * static_cast<double>(dt)));
    if (dt < 2) return dt;
    return std::clamp<TimeNs>(offset, 1, dt - 1);
  }

 private:
  std::vector<double> log_luminance(const RadianceImage& frame) const {
    const auto& img = frame.pixels();
    const int ch = img.channels();
    const auto src = img.samples();
    std::vector<double> out(img.pixel_count());
    for (std::size_t p = 0; p < out.size(); ++p) {
      double acc = 0.0;
      for (int c = 0; c < ch; ++c) acc += src[p * ch + c];
      out[p] = std::log(std::max(acc / ch, config_.log_floor));
    }
    return out;
  }

  void initialize(const RadianceImage& frame, TimeNs t) {
    require(t >= 0, ErrorCategory::validation, "timestamps must be non-negative");
    require(frame.width() <= 65535 && frame.height() <= 65535, ErrorCategory::validation,
            "sensor too large for 16-bit event coordinates");
    width_ = frame.width();
    height_ = frame.height();
    base_ = log_luminance(frame);
    last_log_ = base_;
    level_.assign(base_.size(), 0);
    first_t_ = last_t_ = t;
    initialized_ = true;
  }

  EventSimConfig config_;
  bool initialized_ = false;
  int width_ = 0;
  int height_ = 0;
  TimeNs first_t_ = 0;
  TimeNs last_t_ = 0;
  std::vector<double> base_;
  std::vector<double> last_log_;
  std::vector<std::int64_t> level_;
  std::vector<Event> events_;
};

template <FrameSequence Sequence>
EventStream simulate_events(const Sequence& frames, EventSimConfig config = {}) {
  require(frames.size() >= 2, ErrorCategory::validation,
          "event simulation needs at least two frames");
  EventSimulator sim(config);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& frame = frames[i];
    sim.push(frame.image, frame.timestamp);
  }
  return std::move(sim).finish();
}

}  // namespace eshdr
