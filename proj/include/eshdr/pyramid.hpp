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
#include <vector>

#include "eshdr/image.hpp"

namespace eshdr {

// Burt-Adelson pyramids with the 5-tap binomial kernel [1 4 6 4 1] / 16 and
// clamped borders. Level i+1 keeps the even samples of blurred level i.

namespace detail {

inline int clamp_index(int i, int n) noexcept { return std::clamp(i, 0, n - 1); }

}  // namespace detail

inline Image<float> pyr_down(const Image<float>& img) {
  static constexpr float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  const int w = img.width(), h = img.height(), ch = img.channels();
  const int ow = (w + 1) / 2, oh = (h + 1) / 2;
  // Horizontal pass at the kept columns only.
  Image<float> tmp(ow, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x)
      for (int c = 0; c < ch; ++c) {
        float acc = 0.f;
        for (int t = -2; t <= 2; ++t) acc += k[t + 2] * img(detail::clamp_index(2 * x + t, w), y, c);
        tmp(x, y, c) = acc;
      }
  Image<float> out(ow, oh, ch);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int c = 0; c < ch; ++c) {
        float acc = 0.f;
        for (int t = -2; t <= 2; ++t) acc += k[t + 2] * tmp(x, detail::clamp_index(2 * y + t, h), c);
        out(x, y, c) = acc;
      }
  return out;
}

/// Expands a coarse level to (width, height): even output samples take
/// (1, 6, 1) / 8 of their coarse neighbours, odd ones (4, 4) / 8.
inline Image<float> pyr_up(const Image<float>& coarse, int width, int height) {
  const int cw = coarse.width(), ch_ = coarse.height(), ch = coarse.channels();
  auto expand = [](int i, int n, auto&& at) {
    const int j = i / 2;
    if (i % 2 == 0)
      return (at(detail::clamp_index(j - 1, n)) + 6.f * at(j) + at(detail::clamp_index(j + 1, n))) /
             8.f;
    return (at(j) + at(detail::clamp_index(j + 1, n))) / 2.f;
  };
  Image<float> tmp(width, ch_, ch);
  for (int y = 0; y < ch_; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < ch; ++c)
        tmp(x, y, c) = expand(std::min(x, 2 * cw - 1), cw,
                              [&](int i) { return coarse(detail::clamp_index(i, cw), y, c); });
  Image<float> out(width, height, ch);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < ch; ++c)
        out(x, y, c) = expand(std::min(y, 2 * ch_ - 1), ch_,
                              [&](int i) { return tmp(x, detail::clamp_index(i, ch_), c); });
  return out;
}

inline std::vector<Image<float>> gaussian_pyramid(const Image<float>& img, int levels) {
  std::vector<Image<float>> pyr{img};
  for (int l = 1; l < levels; ++l) pyr.push_back(pyr_down(pyr.back()));
  return pyr;
}

inline std::vector<Image<float>> laplacian_pyramid(const Image<float>& img, int levels) {
  auto pyr = gaussian_pyramid(img, levels);
  for (int l = 0; l + 1 < levels; ++l) {
    const Image<float> up = pyr_up(pyr[l + 1], pyr[l].width(), pyr[l].height());
    auto dst = pyr[l].samples();
    const auto src = up.samples();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  }
  return pyr;
}

inline Image<float> collapse_pyramid(const std::vector<Image<float>>& pyr) {
  Image<float> out = pyr.back();
  for (int l = static_cast<int>(pyr.size()) - 2; l >= 0; --l) {
    Image<float> up = pyr_up(out, pyr[l].width(), pyr[l].height());
    auto dst = up.samples();
    const auto src = pyr[l].samples();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    out = std::move(up);
  }
  return out;
}

}  // namespace eshdr
