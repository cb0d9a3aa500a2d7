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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "eshdr/error.hpp"
#include "eshdr/image.hpp"
#include "eshdr/parallel.hpp"
#include "eshdr/pyramid.hpp"
#include "eshdr/transfer.hpp"

namespace eshdr {

inline constexpr double kLowClip = 0.01;
inline constexpr double kHighClip = 0.99;

/// Triangular weight on a gamma-encoded sample v in [0, 1].
inline double hat_weight_value(double v, double low_clip = kLowClip,
                               double high_clip = kHighClip) noexcept {
  if (v <= low_clip || v >= high_clip) return 0.0;
  return std::max(0.0, 1.0 - std::abs(2.0 * v - 1.0));
}

inline double hat_weight(int code, double low_clip = kLowClip, double high_clip = kHighClip) noexcept {
  return hat_weight_value(static_cast<double>(code) / 255.0, low_clip, high_clip);
}

/// Gamma-encoded frame with its exposure value relative to the reference.
struct ExposedImage {
  NormalizedImage image;
  double ev = 0.0;
};

namespace detail {

inline void require_frames(std::span<const ExposedImage> frames, const char* op) {
  require(!frames.empty(), ErrorCategory::validation, std::string(op) + " needs at least one frame");
  const auto& first = frames.front().image;
  for (const auto& f : frames) {
    require_domain(f.image, Domain::gamma_encoded, op);
    require(f.image.pixels().same_shape(first.pixels()), ErrorCategory::validation,
            std::string(op) + " frames differ in shape");
    require(std::isfinite(f.ev), ErrorCategory::validation, "frame EV is not finite");
  }
}

}  // namespace detail

/// Weighted linear merge to relative radiance, H = sum(w lin / 2^ev) / sum(w).
/// Pixels with no usable sample take the frame whose value is nearest 0.5.
inline RadianceImage debevec_merge(std::span<const ExposedImage> frames, double gamma = kDefaultGamma,
                                   double low_clip = kLowClip, double high_clip = kHighClip) {
  detail::require_frames(frames, "debevec_merge");
  detail::require_gamma(gamma);
  const auto& shape = frames.front().image.pixels();
  Image<float> out(shape.width(), shape.height(), shape.channels());
  std::vector<double> scale;
  for (const auto& f : frames) scale.push_back(std::exp2(f.ev));

  auto dst = out.samples();
  parallel_for(0, static_cast<std::ptrdiff_t>(dst.size()), [&](std::ptrdiff_t i) {
    double num = 0.0, den = 0.0, single = 0.0;
    int contributors = 0;
    std::size_t nearest = 0;
    double nearest_dist = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < frames.size(); ++n) {
      const double v = frames[n].image.pixels().samples()[static_cast<std::size_t>(i)];
      const double lin = std::pow(v, gamma) / scale[n];
      const double w = hat_weight_value(v, low_clip, high_clip);
      if (w > 0.0) {
        num += w * lin;
        den += w;
        single = lin;
        ++contributors;
      }
      const double dist = std::abs(v - 0.5);
      if (dist < nearest_dist) {
        nearest_dist = dist;
        nearest = n;
      }
    }
    double h;
    if (contributors == 1) {
      h = single;
    } else if (contributors > 1) {
      h = num / den;
    } else {
      const double v = frames[nearest].image.pixels().samples()[static_cast<std::size_t>(i)];
      h = std::pow(v, gamma) / scale[nearest];
    }
    dst[static_cast<std::size_t>(i)] = static_cast<float>(h);
  });
  return RadianceImage(std::move(out));
}

struct MertensParams {
  double w_contrast = 1.0;
  double w_saturation = 1.0;
  double w_wellexp = 1.0;
  double sigma_wellexp = 0.2;
};

namespace detail {

inline Image<float> mertens_weight(const Image<float>& img, const MertensParams& p) {
  const int w = img.width(), h = img.height(), ch = img.channels();
  const Image<float> gray = channel_mean(img);
  Image<float> out(w, h, 1);
  const double inv = 1.0 / (2.0 * p.sigma_wellexp * p.sigma_wellexp);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double lap = gray(std::max(x - 1, 0), y) + gray(std::min(x + 1, w - 1), y) +
                         gray(x, std::max(y - 1, 0)) + gray(x, std::min(y + 1, h - 1)) -
                         4.0 * gray(x, y);
      double mean = 0.0;
      for (int c = 0; c < ch; ++c) mean += img(x, y, c);
      mean /= ch;
      double var = 0.0, well = 1.0;
      for (int c = 0; c < ch; ++c) {
        const double v = img(x, y, c);
        var += (v - mean) * (v - mean);
        well *= std::exp(-(v - 0.5) * (v - 0.5) * inv);
      }
      const double sat = ch == 1 ? 1.0 : std::sqrt(var / ch);
      out(x, y) = static_cast<float>(std::pow(std::abs(lap), p.w_contrast) *
                                     std::pow(sat, p.w_saturation) *
                                     std::pow(well, p.w_wellexp));
    }
  return out;
}

inline Image<float> select_channel(const Image<float>& img, int c) {
  Image<float> out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(x, y) = img(x, y, c);
  return out;
}

}  // namespace detail

/// Exposure fusion: per-frame contrast, saturation and well-exposedness
/// weights, blended level by level through Laplacian pyramids.
inline NormalizedImage mertens_fuse(std::span<const NormalizedImage> frames,
                                    const MertensParams& params = {}) {
  require(!frames.empty(), ErrorCategory::validation, "mertens_fuse needs at least one frame");
  require(params.sigma_wellexp > 0.0, ErrorCategory::validation, "sigma_wellexp must be positive");
  const auto& first = frames.front().pixels();
  for (const auto& f : frames) {
    require_domain(f, Domain::gamma_encoded, "mertens_fuse");
    require(f.pixels().same_shape(first), ErrorCategory::validation,
            "mertens_fuse frames differ in shape");
  }
  const int w = first.width(), h = first.height(), ch = first.channels();
  const int levels =
      std::max(1, static_cast<int>(std::floor(std::log2(static_cast<double>(std::min(w, h))))) - 1);

  std::vector<Image<float>> weights(frames.size());
  parallel_for(0, static_cast<std::ptrdiff_t>(frames.size()), [&](std::ptrdiff_t n) {
    weights[static_cast<std::size_t>(n)] =
        detail::mertens_weight(frames[static_cast<std::size_t>(n)].pixels(), params);
  });
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double total = 0.0;
      for (const auto& wt : weights) total += static_cast<double>(wt(x, y)) + 1e-12;
      for (auto& wt : weights) wt(x, y) = static_cast<float>((wt(x, y) + 1e-12) / total);
    }

  std::vector<Image<float>> blended;
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const auto gauss = gaussian_pyramid(weights[n], levels);
    std::vector<std::vector<Image<float>>> lap(static_cast<std::size_t>(ch));
    parallel_for(0, ch, [&](std::ptrdiff_t c) {
      lap[static_cast<std::size_t>(c)] =
          laplacian_pyramid(detail::select_channel(frames[n].pixels(), static_cast<int>(c)), levels);
    });
    if (blended.empty())
      for (int l = 0; l < levels; ++l)
        blended.emplace_back(gauss[static_cast<std::size_t>(l)].width(),
                             gauss[static_cast<std::size_t>(l)].height(), ch);
    for (int l = 0; l < levels; ++l) {
      auto& dst = blended[static_cast<std::size_t>(l)];
      const auto& g = gauss[static_cast<std::size_t>(l)];
      for (int y = 0; y < dst.height(); ++y)
        for (int x = 0; x < dst.width(); ++x)
          for (int c = 0; c < ch; ++c)
            dst(x, y, c) += g(x, y) * lap[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)](x, y);
    }
  }

  Image<float> out(w, h, ch);
  for (int c = 0; c < ch; ++c) {
    std::vector<Image<float>> pyr;
    for (const auto& level : blended) pyr.push_back(detail::select_channel(level, c));
    const Image<float> img = collapse_pyramid(pyr);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out(x, y, c) = std::clamp(img(x, y), 0.0f, 1.0f);
  }
  return NormalizedImage(std::move(out), Domain::gamma_encoded);
}

enum class ToneMode { mu_law, none };

inline std::string_view to_string(ToneMode m) { return m == ToneMode::mu_law ? "mu_law" : "none"; }

struct ToneMapped {
  NormalizedImage image;
  double peak = 0.0;
};

/// Normalizes radiance by its peak, then applies mu-law (mode mu_law) or
/// plain display gamma (mode none).
inline ToneMapped tonemap_output(const RadianceImage& hdr, ToneMode mode = ToneMode::mu_law,
                                 double mu = kDefaultMu, double gamma = kDefaultGamma) {
  const auto& px = hdr.pixels();
  double peak = 0.0;
  for (float v : px.samples()) {
    require(std::isfinite(v), ErrorCategory::validation, "radiance is not finite");
    peak = std::max(peak, static_cast<double>(v));
  }
  Image<float> norm(px.width(), px.height(), px.channels());
  if (peak > 0.0) {
    auto src = px.samples();
    auto dst = norm.samples();
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i] = std::min(1.0f, static_cast<float>(src[i] / peak));
  }
  if (mode == ToneMode::mu_law) return {mu_law(norm, mu), peak};
  return {gamma_encode(NormalizedImage(std::move(norm), Domain::linear), gamma), peak};
}

}  // namespace eshdr
