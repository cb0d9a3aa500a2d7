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
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eshdr/error.hpp"

namespace eshdr {

/// Nanoseconds since the start of a sequence.
using TimeNs = std::int64_t;

/// Interleaved multi-channel raster, row-major, top row first.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;

  Image(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    require(width >= 1 && height >= 1 && channels >= 1, ErrorCategory::validation,
            "image dimensions must be positive, got " + std::to_string(width) + "x" +
                std::to_string(height) + "x" + std::to_string(channels));
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  T& operator()(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
  const T& operator()(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

  std::span<T> samples() noexcept { return data_; }
  std::span<const T> samples() const noexcept { return data_; }

  std::span<T> row(int y) noexcept {
    return std::span<T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_) * channels_);
  }
  std::span<const T> row(int y) const noexcept {
    return std::span<const T>(data_).subspan(index(0, y),
                                             static_cast<std::size_t>(width_) * channels_);
  }

  template <typename U>
  bool same_shape(const Image<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height() && channels_ == other.channels();
  }

  template <typename U>
  bool same_size(const Image<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

inline std::string shape_string(int w, int h, int c) {
  return std::to_string(w) + "x" + std::to_string(h) + "x" + std::to_string(c);
}

template <typename T>
std::string shape_string(const Image<T>& img) {
  return shape_string(img.width(), img.height(), img.channels());
}

/// Encoding of the samples held by a normalized image.
enum class Domain { linear, gamma_encoded, mu_law };

inline std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::linear: return "linear";
    case Domain::gamma_encoded: return "gamma";
    case Domain::mu_law: return "mu-law";
  }
  return "unknown";
}

/// Linear-light scene radiance, non-negative and finite, unbounded above.
class RadianceImage {
 public:
  RadianceImage() = default;

  explicit RadianceImage(Image<float> pixels) : pixels_(std::move(pixels)) {
    require(!pixels_.empty(), ErrorCategory::validation, "radiance image is empty");
    require(pixels_.channels() == 1 || pixels_.channels() == 3, ErrorCategory::validation,
            "radiance image must have 1 or 3 channels, got " +
                std::to_string(pixels_.channels()));
    for (float v : pixels_.samples()) {
      if (!std::isfinite(v)) fail(ErrorCategory::validation, "radiance sample is not finite");
      if (v < 0.0f) fail(ErrorCategory::validation, "radiance sample is negative");
    }
  }

  const Image<float>& pixels() const noexcept { return pixels_; }
  Image<float> release() && { return std::move(pixels_); }

  int width() const noexcept { return pixels_.width(); }
  int height() const noexcept { return pixels_.height(); }
  int channels() const noexcept { return pixels_.channels(); }
  float operator()(int x, int y, int c = 0) const noexcept { return pixels_(x, y, c); }

  friend bool operator==(const RadianceImage&, const RadianceImage&) = default;

 private:
  Image<float> pixels_;
};

/// Samples in [0, 1] tagged with the transfer function they are encoded in.
template <std::floating_point T>
class BasicNormalizedImage {
 public:
  using value_type = T;

  BasicNormalizedImage() = default;

  BasicNormalizedImage(Image<T> pixels, Domain domain)
      : pixels_(std::move(pixels)), domain_(domain) {
    require(!pixels_.empty(), ErrorCategory::validation, "normalized image is empty");
    for (T v : pixels_.samples()) {
      if (!std::isfinite(v)) fail(ErrorCategory::validation, "normalized sample is not finite");
      if (v < T(0) || v > T(1))
        fail(ErrorCategory::validation,
             "normalized sample " + std::to_string(static_cast<double>(v)) +
                 " outside [0, 1]");
    }
  }

  const Image<T>& pixels() const noexcept { return pixels_; }
  Image<T> release() && { return std::move(pixels_); }
  Domain domain() const noexcept { return domain_; }

  int width() const noexcept { return pixels_.width(); }
  int height() const noexcept { return pixels_.height(); }
  int channels() const noexcept { return pixels_.channels(); }
  T operator()(int x, int y, int c = 0) const noexcept { return pixels_(x, y, c); }

  friend bool operator==(const BasicNormalizedImage&, const BasicNormalizedImage&) = default;

 private:
  Image<T> pixels_;
  Domain domain_ = Domain::linear;
};

using NormalizedImage = BasicNormalizedImage<float>;

template <std::floating_point T>
void require_domain(const BasicNormalizedImage<T>& img, Domain expected, std::string_view op) {
  if (img.domain() != expected)
    fail(ErrorCategory::domain_mismatch, std::string(op) + " expects a " +
                                             std::string(to_string(expected)) +
                                             " image, got " + std::string(to_string(img.domain())));
}

/// Capture metadata carried by every LDR frame.
struct CaptureInfo {
  double ev = 0.0;
  double exposure_time = 0.0;  // seconds
  TimeNs timestamp = 0;        // exposure start

  /// Exposure window end in nanoseconds.
  TimeNs end() const noexcept {
    return timestamp + static_cast<TimeNs>(std::llround(exposure_time * 1e9));
  }

  friend bool operator==(const CaptureInfo&, const CaptureInfo&) = default;
};

/// Quantized 8-bit gamma-encoded frame.
class LdrFrame {
 public:
  LdrFrame() = default;

  LdrFrame(Image<std::uint8_t> codes, CaptureInfo info) : codes_(std::move(codes)), info_(info) {
    require(!codes_.empty(), ErrorCategory::validation, "LDR frame is empty");
    require(codes_.channels() == 1 || codes_.channels() == 3, ErrorCategory::validation,
            "LDR frame must have 1 or 3 channels");
    require(std::isfinite(info_.ev), ErrorCategory::validation, "LDR frame EV is not finite");
    require(std::isfinite(info_.exposure_time) && info_.exposure_time > 0.0,
            ErrorCategory::validation, "LDR frame exposure time must be positive");
    require(info_.timestamp >= 0, ErrorCategory::validation,
            "LDR frame timestamp must be non-negative");
  }

  const Image<std::uint8_t>& codes() const noexcept { return codes_; }
  const CaptureInfo& info() const noexcept { return info_; }

  int width() const noexcept { return codes_.width(); }
  int height() const noexcept { return codes_.height(); }
  int channels() const noexcept { return codes_.channels(); }

  friend bool operator==(const LdrFrame&, const LdrFrame&) = default;

 private:
  Image<std::uint8_t> codes_;
  CaptureInfo info_;
};

/// Code values as gamma-encoded samples, v = code / 255.
template <std::floating_point T = float>
BasicNormalizedImage<T> to_normalized(const LdrFrame& frame) {
  const auto& codes = frame.codes();
  Image<T> out(codes.width(), codes.height(), codes.channels());
  auto src = codes.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]) / T(255);
  return BasicNormalizedImage<T>(std::move(out), Domain::gamma_encoded);
}

/// Mean over channels; the single luminance state used by events and flow.
inline Image<float> channel_mean(const Image<float>& img) {
  Image<float> out(img.width(), img.height(), 1);
  const int ch = img.channels();
  auto src = img.samples();
  auto dst = out.samples();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    double acc = 0.0;
    for (int c = 0; c < ch; ++c) acc += src[p * ch + c];
    dst[p] = static_cast<float>(acc / ch);
  }
  return out;
}

}  // namespace eshdr
