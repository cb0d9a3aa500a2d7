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
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "eshdr/align.hpp"
#include "eshdr/error.hpp"
#include "eshdr/image.hpp"
#include "eshdr/transfer.hpp"

namespace eshdr {

/// Returned by psnr when the images are identical.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

namespace detail {

template <typename T>
void require_same_shape(const Image<T>& a, const Image<T>& b, const char* op) {
  require(!a.empty() && a.same_shape(b), ErrorCategory::validation,
          std::string(op) + " needs images of the same shape, got " + shape_string(a) + " and " +
              shape_string(b));
}

}  // namespace detail

inline double mse(const Image<float>& a, const Image<float>& b) {
  detail::require_same_shape(a, b, "mse");
  auto sa = a.samples();
  auto sb = b.samples();
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = static_cast<double>(sa[i]) - sb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(sa.size());
}

inline double psnr(const Image<float>& a, const Image<float>& b, double peak = 1.0) {
  require(std::isfinite(peak) && peak > 0.0, ErrorCategory::validation, "psnr peak must be positive");
  const double m = mse(a, b);
  if (m == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(peak * peak / m);
}

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over the Gaussian-windowed map, valid positions only, averaged
/// over channels.
inline double ssim(const Image<float>& a, const Image<float>& b, double peak = 1.0,
                   const SsimParams& params = {}) {
  detail::require_same_shape(a, b, "ssim");
  require(params.window >= 1 && params.window % 2 == 1, ErrorCategory::validation,
          "ssim window must be odd");
  require(std::min(a.width(), a.height()) >= params.window, ErrorCategory::validation,
          "ssim needs images at least as large as the window");
  require(peak > 0.0, ErrorCategory::validation, "ssim peak must be positive");
  const int n = params.window, r = n / 2;
  std::vector<double> g(static_cast<std::size_t>(n));
  double gs = 0.0;
  for (int i = 0; i < n; ++i) {
    g[static_cast<std::size_t>(i)] = std::exp(-(i - r) * (i - r) / (2.0 * params.sigma * params.sigma));
    gs += g[static_cast<std::size_t>(i)];
  }
  for (double& v : g) v /= gs;
  const double c1 = (params.k1 * peak) * (params.k1 * peak);
  const double c2 = (params.k2 * peak) * (params.k2 * peak);
  const int w = a.width(), h = a.height(), ow = w - n + 1, oh = h - n + 1;

  // Horizontal then vertical filtering of the five moment images.
  auto filter = [&](auto&& sample, int c) {
    Image<double> tmp(ow, h, 1), out(ow, oh, 1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += g[static_cast<std::size_t>(i)] * sample(x + i, y, c);
        tmp(x, y) = acc;
      }
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += g[static_cast<std::size_t>(i)] * tmp(x, y + i);
        out(x, y) = acc;
      }
    return out;
  };
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    const auto ma = filter([&](int x, int y, int k) { return static_cast<double>(a(x, y, k)); }, c);
    const auto mb = filter([&](int x, int y, int k) { return static_cast<double>(b(x, y, k)); }, c);
    const auto saa = filter([&](int x, int y, int k) { return static_cast<double>(a(x, y, k)) * a(x, y, k); }, c);
    const auto sbb = filter([&](int x, int y, int k) { return static_cast<double>(b(x, y, k)) * b(x, y, k); }, c);
    const auto sab = filter([&](int x, int y, int k) { return static_cast<double>(a(x, y, k)) * b(x, y, k); }, c);
    double acc = 0.0;
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        const double mua = ma(x, y), mub = mb(x, y);
        const double va = saa(x, y) - mua * mua, vb = sbb(x, y) - mub * mub;
        const double cov = sab(x, y) - mua * mub;
        acc += ((2.0 * mua * mub + c1) * (2.0 * cov + c2)) /
               ((mua * mua + mub * mub + c1) * (va + vb + c2));
      }
    total += acc / (static_cast<double>(ow) * oh);
  }
  return total / a.channels();
}

/// Both images divided by the ground truth's peak; the estimate is clipped to
/// [0, 1] before mu-law.
struct MuLawPair {
  Image<float> estimate;
  Image<float> truth;
  double peak = 0.0;
};

inline MuLawPair mu_law_pair(const Image<float>& estimate, const Image<float>& truth,
                             double mu = kDefaultMu) {
  detail::require_same_shape(estimate, truth, "mu-law metric");
  double peak = 0.0;
  for (float v : truth.samples()) {
    require(std::isfinite(v) && v >= 0.0f, ErrorCategory::validation,
            "ground-truth radiance must be finite and non-negative");
    peak = std::max(peak, static_cast<double>(v));
  }
  require(peak > 0.0, ErrorCategory::validation, "ground-truth radiance is all zero");
  auto normalize = [peak](const Image<float>& img) {
    Image<float> out(img.width(), img.height(), img.channels());
    auto src = img.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const double v = std::isfinite(src[i]) ? src[i] / peak : 0.0;
      dst[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
  };
  return {std::move(mu_law(normalize(estimate), mu)).release(),
          std::move(mu_law(normalize(truth), mu)).release(), peak};
}

inline double mu_psnr(const Image<float>& estimate, const Image<float>& truth, double mu = kDefaultMu) {
  const auto pair = mu_law_pair(estimate, truth, mu);
  return psnr(pair.estimate, pair.truth, 1.0);
}

inline double mu_ssim(const Image<float>& estimate, const Image<float>& truth, double mu = kDefaultMu) {
  const auto pair = mu_law_pair(estimate, truth, mu);
  return ssim(pair.estimate, pair.truth, 1.0);
}

inline constexpr double kCharbonnierEps = 1e-3;

inline double charbonnier(const Image<float>& a, const Image<float>& b, double eps = kCharbonnierEps) {
  detail::require_same_shape(a, b, "charbonnier");
  auto sa = a.samples();
  auto sb = b.samples();
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = static_cast<double>(sa[i]) - sb[i];
    acc += std::sqrt(d * d + eps * eps);
  }
  return acc / static_cast<double>(sa.size());
}

struct EpeResult {
  double mean = 0.0;
  double within_one = 0.0;  // fraction of pixels with error <= 1 px
  std::size_t count = 0;
};

/// Endpoint error over pixels valid in both fields, optionally restricted
/// by a nonzero mask.
inline EpeResult flow_epe(const FlowField& est, const FlowField& gt,
                          const Image<std::uint8_t>* mask = nullptr) {
  require(est.width() == gt.width() && est.height() == gt.height(), ErrorCategory::validation,
          "flow fields differ in size");
  if (mask)
    require(mask->width() == est.width() && mask->height() == est.height(),
            ErrorCategory::validation, "EPE mask differs in size");
  EpeResult r;
  double acc = 0.0;
  std::size_t good = 0;
  for (int y = 0; y < est.height(); ++y)
    for (int x = 0; x < est.width(); ++x) {
      if (!est.valid(x, y) || !gt.valid(x, y) || (mask && !(*mask)(x, y))) continue;
      const double e = std::hypot(static_cast<double>(est.u(x, y)) - gt.u(x, y),
                                  static_cast<double>(est.v(x, y)) - gt.v(x, y));
      acc += e;
      if (e <= 1.0) ++good;
      ++r.count;
    }
  if (r.count > 0) {
    r.mean = acc / static_cast<double>(r.count);
    r.within_one = static_cast<double>(good) / static_cast<double>(r.count);
  }
  return r;
}

}  // namespace eshdr
