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
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "eshdr/image.hpp"

namespace eshdr {

struct Event {
  TimeNs t = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t polarity = 1;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Global stream order: time, then row, column and polarity.
inline bool event_before(const Event& a, const Event& b) noexcept {
  return std::tie(a.t, a.y, a.x, a.polarity) < std::tie(b.t, b.y, b.x, b.polarity);
}

/// Time-ordered events of one sensor plus the model parameters they were made with.
class EventStream {
 public:
  EventStream() = default;

  EventStream(int width, int height, double contrast_threshold, double log_floor,
              std::vector<Event> events)
      : width_(width),
        height_(height),
        contrast_threshold_(contrast_threshold),
        log_floor_(log_floor),
        events_(std::move(events)) {
    require(width >= 1 && height >= 1 && width <= 65535 && height <= 65535,
            ErrorCategory::validation, "event sensor size out of range");
    require(std::isfinite(contrast_threshold) && contrast_threshold > 0.0,
            ErrorCategory::validation, "contrast threshold must be positive");
    require(std::isfinite(log_floor) && log_floor > 0.0, ErrorCategory::validation,
            "log floor must be positive");
    for (std::size_t i = 0; i < events_.size(); ++i) {
      const Event& e = events_[i];
      if (e.x >= width || e.y >= height)
        fail(ErrorCategory::validation, "event " + std::to_string(i) + " outside the sensor");
      if (e.polarity != 1 && e.polarity != -1)
        fail(ErrorCategory::validation, "event " + std::to_string(i) + " has invalid polarity");
      if (i > 0 && !event_before(events_[i - 1], e))
        fail(ErrorCategory::validation, "events not in (t, y, x, polarity) order at index " +
                                            std::to_string(i));
    }
    if (!events_.empty()) {
      begin_ = events_.front().t;
      end_ = events_.back().t;
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double contrast_threshold() const noexcept { return contrast_threshold_; }
  double log_floor() const noexcept { return log_floor_; }
  const std::vector<Event>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }

  /// Time span of the recording; defaults to the first/last event time.
  TimeNs begin() const noexcept { return begin_; }
  TimeNs end() const noexcept { return end_; }

  void set_span(TimeNs begin, TimeNs end) {
    require(begin <= end, ErrorCategory::validation, "event span is reversed");
    if (!events_.empty())
      require(events_.front().t >= begin && events_.back().t <= end, ErrorCategory::validation,
              "event span does not cover all events");
    begin_ = begin;
    end_ = end;
  }

  friend bool operator==(const EventStream&, const EventStream&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double contrast_threshold_ = 0.2;
  double log_floor_ = 1e-4;
  std::vector<Event> events_;
  TimeNs begin_ = 0;
  TimeNs end_ = 0;
};

/// Per-pixel view of a stream: each pixel's events in time order with a
/// running polarity sum, so window queries are two binary searches.
class EventIndex {
 public:
  explicit EventIndex(const EventStream& stream)
      : width_(stream.width()),
        height_(stream.height()),
        contrast_threshold_(stream.contrast_threshold()),
        offsets_(static_cast<std::size_t>(stream.width()) * stream.height() + 1, 0) {
    const auto& events = stream.events();
    for (const Event& e : events) ++offsets_[pixel(e.x, e.y) + 1];
    for (std::size_t p = 1; p < offsets_.size(); ++p) offsets_[p] += offsets_[p - 1];
    times_.resize(events.size());
    polarities_.resize(events.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Event& e : events) {
      const std::size_t slot = fill[pixel(e.x, e.y)]++;
      times_[slot] = e.t;
      polarities_[slot] = e.polarity;
    }
    prefix_.resize(events.size() + offsets_.size());
    for (std::size_t p = 0; p + 1 < offsets_.size(); ++p) {
      std::int32_t run = 0;
      prefix_[offsets_[p] + p] = 0;
      for (std::size_t i = offsets_[p]; i < offsets_[p + 1]; ++i) {
        run += polarities_[i];
        prefix_[i + p + 1] = run;
      }
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double contrast_threshold() const noexcept { return contrast_threshold_; }

  std::size_t pixel(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  std::span<const TimeNs> times(std::size_t p) const noexcept {
    return std::span<const TimeNs>(times_).subspan(offsets_[p], offsets_[p + 1] - offsets_[p]);
  }
  std::span<const std::int8_t> polarities(std::size_t p) const noexcept {
    return std::span<const std::int8_t>(polarities_)
        .subspan(offsets_[p], offsets_[p + 1] - offsets_[p]);
  }

  /// Sum of polarities with t0 <= t < t1 at pixel p; reversed bounds negate.
  std::int32_t polarity_sum(std::size_t p, TimeNs t0, TimeNs t1) const noexcept {
    if (t0 > t1) return -polarity_sum(p, t1, t0);
    const auto [lo, hi] = range(p, t0, t1);
    return prefix_[hi + p] - prefix_[lo + p];
  }

  /// Number of events with t0 <= t < t1 at pixel p (order-insensitive).
  std::int32_t event_count(std::size_t p, TimeNs t0, TimeNs t1) const noexcept {
    if (t0 > t1) std::swap(t0, t1);
    const auto [lo, hi] = range(p, t0, t1);
    return static_cast<std::int32_t>(hi - lo);
  }

 private:
  std::pair<std::size_t, std::size_t> range(std::size_t p, TimeNs t0, TimeNs t1) const noexcept {
    const auto first = times_.begin() + static_cast<std::ptrdiff_t>(offsets_[p]);
    const auto last = times_.begin() + static_cast<std::ptrdiff_t>(offsets_[p + 1]);
    const auto lo = std::lower_bound(first, last, t0);
    const auto hi = std::lower_bound(lo, last, t1);
    return {static_cast<std::size_t>(lo - times_.begin()),
            static_cast<std::size_t>(hi - times_.begin())};
  }

  int width_;
  int height_;
  double contrast_threshold_;
  std::vector<std::size_t> offsets_;
  std::vector<TimeNs> times_;
  std::vector<std::int8_t> polarities_;
  std::vector<std::int32_t> prefix_;
};

/// Signed polarity count per pixel over [t0, t1); t0 > t1 yields the negated
/// count over [t1, t0).
inline Image<std::int32_t> accumulate_polarity(const EventIndex& index, TimeNs t0, TimeNs t1) {
  Image<std::int32_t> out(index.width(), index.height(), 1);
  auto dst = out.samples();
  for (std::size_t p = 0; p < dst.size(); ++p) dst[p] = index.polarity_sum(p, t0, t1);
  return out;
}

inline Image<std::int32_t> accumulate_polarity(const EventStream& stream, TimeNs t0, TimeNs t1) {
  return accumulate_polarity(EventIndex(stream), t0, t1);
}

/// Event-predicted log-intensity change: c times the signed count.
inline Image<float> predict_log_change(const EventIndex& index, TimeNs t0, TimeNs t1) {
  Image<float> out(index.width(), index.height(), 1);
  auto dst = out.samples();
  const double c = index.contrast_threshold();
  for (std::size_t p = 0; p < dst.size(); ++p)
    dst[p] = static_cast<float>(c * index.polarity_sum(p, t0, t1));
  return out;
}

inline Image<float> predict_log_change(const EventStream& stream, TimeNs t0, TimeNs t1) {
  return predict_log_change(EventIndex(stream), t0, t1);
}

}  // namespace eshdr
