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
#include <string>

#include "eshdr/image.hpp"

namespace eshdr {

inline constexpr double kDefaultGamma = 2.4;
inline constexpr double kDefaultMu = 5000.0;

// Scalar transfer functions. Image-level variants below apply them per sample.

template <std::floating_point T>
T gamma_decode(T v, T gamma) {
  return std::pow(v, gamma);
}

template <std::floating_point T>
T gamma_encode(T v, T gamma) {
  return std::pow(v, T(1) / gamma);
}

template <std::floating_point T>
T mu_law(T x, T mu) {
  return std::log1p(mu * x) / std::log1p(mu);
}

namespace detail {

inline void require_gamma(double gamma) {
  require(std::isfinite(gamma) && gamma > 0.0, ErrorCategory::validation,
          "gamma must be positive and finite");
}

template <std::floating_point T, typename Fn>
Image<T> map_samples(const Image<T>& in, Fn&& fn) {
  Image<T> out(in.width(), in.height(), in.channels());
  auto src = in.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = fn(src[i]);
  return out;
}

}  // namespace detail

/// v -> v^gamma, gamma-encoded to linear.
template <std::floating_point T>
BasicNormalizedImage<T> gamma_decode(const BasicNormalizedImage<T>& img,
                                     double gamma = kDefaultGamma) {
  require_domain(img, Domain::gamma_encoded, "gamma_decode");
  detail::require_gamma(gamma);
  const auto g = static_cast<T>(gamma);
  return {detail::map_samples(img.pixels(), [g](T v) { return gamma_decode(v, g); }),
          Domain::linear};
}

/// v -> v^(1/gamma), linear to gamma-encoded.
template <std::floating_point T>
BasicNormalizedImage<T> gamma_encode(const BasicNormalizedImage<T>& img,
                                     double gamma = kDefaultGamma) {
  require_domain(img, Domain::linear, "gamma_encode");
  detail::require_gamma(gamma);
  const auto g = static_cast<T>(gamma);
  return {detail::map_samples(img.pixels(), [g](T v) { return gamma_encode(v, g); }),
          Domain::gamma_encoded};
}

/// mu-law range compression of samples already normalized to [0, 1] by a
/// caller-chosen peak. Out-of-range input is a validation error, not clamped.
template <std::floating_point T>
BasicNormalizedImage<T> mu_law(const Image<T>& normalized, double mu = kDefaultMu) {
  require(std::isfinite(mu) && mu > 0.0, ErrorCategory::validation, "mu must be positive");
  for (T v : normalized.samples()) {
    if (!std::isfinite(v) || v < T(0) || v > T(1))
      fail(ErrorCategory::validation,
           "mu_law input " + std::to_string(static_cast<double>(v)) +
               " outside [0, 1]; normalize by a peak first");
  }
  const double denom = std::log1p(mu);
  return {detail::map_samples(normalized,
                              [mu, denom](T v) {
                                const double y = std::log1p(mu * static_cast<double>(v)) / denom;
                                return static_cast<T>(std::clamp(y, 0.0, 1.0));
                              }),
          Domain::mu_law};
}

template <std::floating_point T>
BasicNormalizedImage<T> mu_law(const BasicNormalizedImage<T>& img, double mu = kDefaultMu) {
  require_domain(img, Domain::linear, "mu_law");
  return mu_law(img.pixels(), mu);
}

/// Simulates a gamma-encoded frame captured with exposure tau_n instead of
/// tau_ref: decode, scale by tau_n / tau_ref, clip to [0, 1], re-encode.
/// Equal exposure times return the input unchanged.
template <std::floating_point T>
BasicNormalizedImage<T> exposure_align(const BasicNormalizedImage<T>& ref, double tau_n,
                                       double tau_ref, double gamma = kDefaultGamma) {
  require_domain(ref, Domain::gamma_encoded, "exposure_align");
  require(std::isfinite(tau_n) && tau_n > 0.0 && std::isfinite(tau_ref) && tau_ref > 0.0,
          ErrorCategory::validation, "exposure times must be positive");
  detail::require_gamma(gamma);
  if (tau_n == tau_ref) return ref;
  const double ratio = tau_n / tau_ref;
  return {detail::map_samples(ref.pixels(),
                              [ratio, gamma](T v) {
                                const double lin =
                                    std::min(1.0, std::pow(static_cast<double>(v), gamma) * ratio);
                                return static_cast<T>(std::pow(lin, 1.0 / gamma));
                              }),
          Domain::gamma_encoded};
}

/// Bilinear interpolation of channel c at (x, y); coordinates outside the
/// image are clamped to the border.
template <typename T>
double bilinear_sample(const Image<T>& img, double x, double y, int c = 0) {
  const double cx = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  const double cy = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(cx));
  const int y0 = static_cast<int>(std::floor(cy));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = cx - x0;
  const double fy = cy - y0;
  const double top = (1.0 - fx) * img(x0, y0, c) + fx * img(x1, y0, c);
  const double bottom = (1.0 - fx) * img(x0, y1, c) + fx * img(x1, y1, c);
  return (1.0 - fy) * top + fy * bottom;
}

template <std::floating_point T>
double bilinear_sample(const BasicNormalizedImage<T>& img, double x, double y, int c = 0) {
  return bilinear_sample(img.pixels(), x, y, c);
}

}  // namespace eshdr
