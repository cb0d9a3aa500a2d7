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
#include <utility>
#include <vector>

#include "eshdr/events.hpp"
#include "eshdr/image.hpp"
#include "eshdr/parallel.hpp"
#include "eshdr/pyramid.hpp"
#include "eshdr/transfer.hpp"

namespace eshdr {

/// Dense backward flow: source(p + flow(p)) corresponds to reference(p).
struct FlowField {
  Image<float> uv;             // 2 channels, pixels
  Image<std::uint8_t> valid;   // 1 channel, 0 or 1

  FlowField() = default;
  FlowField(int width, int height) : uv(width, height, 2), valid(width, height, 1, 1) {}

  int width() const noexcept { return uv.width(); }
  int height() const noexcept { return uv.height(); }
  float u(int x, int y) const noexcept { return uv(x, y, 0); }
  float v(int x, int y) const noexcept { return uv(x, y, 1); }
};

inline FlowField constant_flow(int width, int height, double u, double v) {
  FlowField f(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      f.uv(x, y, 0) = static_cast<float>(u);
      f.uv(x, y, 1) = static_cast<float>(v);
    }
  return f;
}

/// Time window [start, start + duration) of events attributed to a frame.
struct EventWindow {
  TimeNs start = 0;
  TimeNs duration = 0;
  TimeNs end() const noexcept { return start + duration; }
};

/// Two-channel alignment input: log linear luminance, and an event-count
/// edge map normalized by its 99th percentile. `usable` marks pixels whose
/// luminance is a measurement rather than a clipped bound; when empty every
/// pixel is usable.
struct AlignmentChannels {
  Image<float> data;    // 2 channels
  Image<float> usable = {};  // 1 channel, 0 or 1
};

namespace detail {

inline Image<float> log_luminance(const NormalizedImage& frame, double gamma, double log_floor) {
  require_domain(frame, Domain::gamma_encoded, "build_alignment_channels");
  const auto& px = frame.pixels();
  Image<float> out(px.width(), px.height(), 1);
  const int ch = px.channels();
  for (int y = 0; y < px.height(); ++y)
    for (int x = 0; x < px.width(); ++x) {
      double acc = 0.0;
      for (int c = 0; c < ch; ++c) acc += std::pow(static_cast<double>(px(x, y, c)), gamma);
      out(x, y) = static_cast<float>(std::log(std::max(acc / ch, log_floor)));
    }
  return out;
}

/// 1 where every channel lies strictly inside the code range, so the sample
/// is neither clipped nor crushed to black.
inline Image<float> unsaturated_mask(const NormalizedImage& frame) {
  const auto& px = frame.pixels();
  Image<float> out(px.width(), px.height(), 1, 1.0f);
  constexpr float lo = 0.5f / 255.0f, hi = 254.5f / 255.0f;
  for (int y = 0; y < px.height(); ++y)
    for (int x = 0; x < px.width(); ++x)
      for (int c = 0; c < px.channels(); ++c)
        if (px(x, y, c) <= lo || px(x, y, c) >= hi) out(x, y) = 0.0f;
  return out;
}

inline Image<float> event_edge_map(const EventIndex& events, EventWindow window) {
  Image<float> out(events.width(), events.height(), 1);
  auto dst = out.samples();
  for (std::size_t p = 0; p < dst.size(); ++p)
    dst[p] = static_cast<float>(events.event_count(p, window.start, window.end()));
  std::vector<float> sorted(dst.begin(), dst.end());
  const auto rank = static_cast<std::ptrdiff_t>(0.99 * static_cast<double>(sorted.size() - 1));
  std::nth_element(sorted.begin(), sorted.begin() + rank, sorted.end());
  float scale = sorted[static_cast<std::size_t>(rank)];
  if (scale <= 0.f) scale = *std::max_element(dst.begin(), dst.end());
  if (scale > 0.f)
    for (float& v : dst) v /= scale;
  return out;
}

}  // namespace detail

/// Builds the channel pair for a frame and the reference. The reference must
/// already be exposure-aligned to the frame (exposure_align). Each window
/// must lie inside the stream's recorded span.
inline std::pair<AlignmentChannels, AlignmentChannels> build_alignment_channels(
    const NormalizedImage& frame_n, const NormalizedImage& frame_ref_aligned,
    const EventStream& stream, const EventIndex& events, EventWindow window_n,
    EventWindow window_ref, double gamma = kDefaultGamma) {
  require(frame_n.width() == frame_ref_aligned.width() &&
              frame_n.height() == frame_ref_aligned.height(),
          ErrorCategory::validation, "alignment frames differ in size");
  require(frame_n.width() == events.width() && frame_n.height() == events.height(),
          ErrorCategory::validation, "frames and event sensor differ in size");
  for (const EventWindow& w : {window_n, window_ref})
    require(w.duration >= 0 && w.start >= stream.begin() && w.end() <= stream.end(),
            ErrorCategory::validation,
            "event window [" + std::to_string(w.start) + ", " + std::to_string(w.end()) +
                ") outside the stream span [" + std::to_string(stream.begin()) + ", " +
                std::to_string(stream.end()) + "]");
  auto make = [&](const NormalizedImage& frame, EventWindow w) {
    const Image<float> lum = detail::log_luminance(frame, gamma, stream.log_floor());
    const Image<float> edges = detail::event_edge_map(events, w);
    AlignmentChannels out{Image<float>(lum.width(), lum.height(), 2),
                          detail::unsaturated_mask(frame)};
    for (int y = 0; y < lum.height(); ++y)
      for (int x = 0; x < lum.width(); ++x) {
        out.data(x, y, 0) = lum(x, y);
        out.data(x, y, 1) = edges(x, y);
      }
    return out;
  };
  return {make(frame_n, window_n), make(frame_ref_aligned, window_ref)};
}

struct FlowParams {
  int coarsest_size = 16;  // stop adding levels once min(width, height) <= this
  int window = 7;
  int iterations = 10;
  double lambda_ev = 1.0;
  double damping = 3e-2;
  double max_step = 1.0;  // per-iteration update length, pixels of the current level
  double eigen_floor = 1e-6;
};

namespace detail {

/// Windowed sum over a (2r+1)^2 box, truncated at the borders.
inline Image<double> box_sum(const Image<double>& img, int r) {
  const int w = img.width(), h = img.height();
  Image<double> tmp(w, h, 1);
  for (int y = 0; y < h; ++y) {
    double acc = 0.0;
    for (int x = 0; x <= std::min(r, w - 1); ++x) acc += img(x, y);
    for (int x = 0; x < w; ++x) {
      tmp(x, y) = acc;
      if (x + r + 1 < w) acc += img(x + r + 1, y);
      if (x - r >= 0) acc -= img(x - r, y);
    }
  }
  Image<double> out(w, h, 1);
  for (int x = 0; x < w; ++x) {
    double acc = 0.0;
    for (int y = 0; y <= std::min(r, h - 1); ++y) acc += tmp(x, y);
    for (int y = 0; y < h; ++y) {
      out(x, y) = acc;
      if (y + r + 1 < h) acc += tmp(x, y + r + 1);
      if (y - r >= 0) acc -= tmp(x, y - r);
    }
  }
  return out;
}

/// Central differences with clamped borders, per channel.
inline std::pair<Image<float>, Image<float>> gradients(const Image<float>& img) {
  const int w = img.width(), h = img.height(), ch = img.channels();
  Image<float> gx(w, h, ch), gy(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        gx(x, y, c) = 0.5f * (img(std::min(x + 1, w - 1), y, c) - img(std::max(x - 1, 0), y, c));
        gy(x, y, c) = 0.5f * (img(x, std::min(y + 1, h - 1), c) - img(x, std::max(y - 1, 0), c));
      }
  return {std::move(gx), std::move(gy)};
}

inline Image<float> upsample_flow(const Image<float>& coarse, int width, int height) {
  Image<float> out(width, height, 2);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 2; ++c)
        out(x, y, c) = static_cast<float>(2.0 * bilinear_sample(coarse, 0.5 * x, 0.5 * y, c));
  return out;
}

/// Whether p + flow(p) lands inside the image.
inline bool inside(const Image<float>& flow, int x, int y) {
  const double sx = x + flow(x, y, 0), sy = y + flow(x, y, 1);
  return sx >= 0.0 && sy >= 0.0 && sx <= flow.width() - 1.0 && sy <= flow.height() - 1.0;
}

inline double min_eigenvalue(double a, double b, double d) {
  const double tr = 0.5 * (a + d);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (a - d) * (a - d) + b * b));
  return tr - disc;
}

}  // namespace detail

/// Coarse-to-fine dense Lucas-Kanade over both channels, the event channel
/// weighted by lambda_ev. Every pixel refines the upsampled coarser estimate
/// with Gauss-Newton steps on the squared differences of its own window.
/// Luminance samples that are clipped on either side of the match are left
/// out, so the event channel alone drives clipped regions. Pixels whose
/// reference structure tensor has its smaller eigenvalue below
/// eigen_floor, or whose match lies outside the source, are marked invalid.
inline FlowField estimate_flow(const AlignmentChannels& source, const AlignmentChannels& reference,
                               const FlowParams& params = {}) {
  require(source.data.same_shape(reference.data) && source.data.channels() == 2,
          ErrorCategory::validation, "flow inputs must be matching two-channel images");
  require(params.window >= 1 && params.window % 2 == 1, ErrorCategory::validation,
          "flow window must be odd and positive");
  require(params.iterations >= 0 && params.coarsest_size >= 1, ErrorCategory::validation,
          "invalid flow parameters");
  require(std::isfinite(params.lambda_ev) && params.lambda_ev >= 0.0, ErrorCategory::validation,
          "lambda_ev must be non-negative");
  for (const AlignmentChannels* c : {&source, &reference})
    require(c->usable.empty() || (c->usable.channels() == 1 && c->usable.same_size(c->data)),
            ErrorCategory::validation, "usable mask must be one channel matching the data");

  auto weighted = [&](const Image<float>& in) {
    Image<float> out = in;
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x)
        out(x, y, 1) = static_cast<float>(params.lambda_ev * out(x, y, 1));
    return out;
  };
  auto mask = [&](const AlignmentChannels& in) {
    return in.usable.empty() ? Image<float>(in.data.width(), in.data.height(), 1, 1.0f) : in.usable;
  };
  std::vector<Image<float>> src_pyr{weighted(source.data)};
  std::vector<Image<float>> ref_pyr{weighted(reference.data)};
  std::vector<Image<float>> src_mask{mask(source)};
  std::vector<Image<float>> ref_mask{mask(reference)};
  while (std::min(src_pyr.back().width(), src_pyr.back().height()) > params.coarsest_size) {
    src_pyr.push_back(pyr_down(src_pyr.back()));
    ref_pyr.push_back(pyr_down(ref_pyr.back()));
    src_mask.push_back(pyr_down(src_mask.back()));
    ref_mask.push_back(pyr_down(ref_mask.back()));
  }
  // A luminance sample takes part only where the filtered mask shows no
  // clipped pixel in its footprint, on both sides of the match.
  constexpr double kUsable = 0.999;

  const int r = params.window / 2;
  Image<float> flow;
  Image<double> min_eig;
  for (int level = static_cast<int>(src_pyr.size()) - 1; level >= 0; --level) {
    const Image<float>& src = src_pyr[static_cast<std::size_t>(level)];
    const Image<float>& ref = ref_pyr[static_cast<std::size_t>(level)];
    const Image<float>& smask = src_mask[static_cast<std::size_t>(level)];
    const Image<float>& rmask = ref_mask[static_cast<std::size_t>(level)];
    const int w = ref.width(), h = ref.height(), ch = ref.channels();
    flow = flow.empty() ? Image<float>(w, h, 2) : detail::upsample_flow(flow, w, h);
    const auto [rgx, rgy] = detail::gradients(ref);

    // Structure tensor of the reference window, shared by every iteration.
    Image<double> gxx(w, h, 1), gxy(w, h, 1), gyy(w, h, 1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = rmask(x, y) >= kUsable ? 0 : 1; c < ch; ++c) {
          gxx(x, y) += static_cast<double>(rgx(x, y, c)) * rgx(x, y, c);
          gxy(x, y) += static_cast<double>(rgx(x, y, c)) * rgy(x, y, c);
          gyy(x, y) += static_cast<double>(rgy(x, y, c)) * rgy(x, y, c);
        }
    const Image<double> A = detail::box_sum(gxx, r), B = detail::box_sum(gxy, r),
                        D = detail::box_sum(gyy, r);

    parallel_for(0, h, [&](std::ptrdiff_t yi) {
      const int y = static_cast<int>(yi);
      for (int x = 0; x < w; ++x) {
        double u = flow(x, y, 0), v = flow(x, y, 1);
        for (int it = 0; it < params.iterations; ++it) {
          // The outer ring of every level is smeared by the clamped pyramid
          // filter and has one-sided gradients; window samples on it, or
          // matched to it or beyond, are left out of the normal equations.
          double a = params.damping, b = 0.0, d = params.damping, e = 0.0, f = 0.0;
          for (int qy = std::max(1, y - r); qy <= std::min(h - 2, y + r); ++qy) {
            const double sy = qy + v;
            if (sy < 1.0 || sy > h - 2.0) continue;
            for (int qx = std::max(1, x - r); qx <= std::min(w - 2, x + r); ++qx) {
              const double sx = qx + u;
              if (sx < 1.0 || sx > w - 2.0) continue;
              const bool lum = rmask(qx, qy) >= kUsable && bilinear_sample(smask, sx, sy) >= kUsable;
              for (int c = lum ? 0 : 1; c < ch; ++c) {
                const double gx = rgx(qx, qy, c), gy = rgy(qx, qy, c);
                const double dt = bilinear_sample(src, sx, sy, c) - ref(qx, qy, c);
                a += gx * gx;
                b += gx * gy;
                d += gy * gy;
                e += gx * dt;
                f += gy * dt;
              }
            }
          }
          const double det = a * d - b * b;
          if (!(det > 0.0)) break;
          double du = -(d * e - b * f) / det;
          double dv = -(a * f - b * e) / det;
          const double step = std::hypot(du, dv);
          if (step > params.max_step) {
            du *= params.max_step / step;
            dv *= params.max_step / step;
          }
          u += du;
          v += dv;
          if (du * du + dv * dv < 1e-8) break;
        }
        flow(x, y, 0) = static_cast<float>(u);
        flow(x, y, 1) = static_cast<float>(v);
      }
    });

    if (level == 0) {
      min_eig = Image<double>(w, h, 1);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) min_eig(x, y) = detail::min_eigenvalue(A(x, y), B(x, y), D(x, y));
    }
  }

  FlowField out(flow.width(), flow.height());
  out.uv = std::move(flow);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      out.valid(x, y) = min_eig(x, y) >= params.eigen_floor && detail::inside(out.uv, x, y) ? 1 : 0;
  return out;
}

/// Zeroes the flow, and marks it valid, at every pixel with no event within
/// `radius` pixels during [t0, t1): without a brightness change between the
/// two instants nothing there moved.
inline void freeze_static(FlowField& flow, const EventIndex& events, TimeNs t0, TimeNs t1, int radius) {
  require(events.width() == flow.width() && events.height() == flow.height(), ErrorCategory::validation,
          "flow and event sensor differ in size");
  require(t0 <= t1 && radius >= 0, ErrorCategory::validation, "freeze_static needs t0 <= t1 and radius >= 0");
  const int w = flow.width(), h = flow.height();
  Image<double> active(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) active(x, y) = events.event_count(events.pixel(x, y), t0, t1) > 0 ? 1.0 : 0.0;
  const Image<double> near = detail::box_sum(active, radius);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (near(x, y) == 0.0) {
        flow.uv(x, y, 0) = flow.uv(x, y, 1) = 0.f;
        flow.valid(x, y) = 1;
      }
}

struct WarpResult {
  NormalizedImage image;
  Image<std::uint8_t> valid;
};

/// out(p) = img(p + flow(p)) by bilinear sampling; pixels with invalid flow
/// keep img(p) and stay invalid.
inline WarpResult backward_warp(const NormalizedImage& img, const FlowField& flow) {
  require(img.width() == flow.width() && img.height() == flow.height(),
          ErrorCategory::validation, "warp image and flow differ in size");
  const auto& px = img.pixels();
  Image<float> out(px.width(), px.height(), px.channels());
  parallel_for(0, px.height(), [&](std::ptrdiff_t yi) {
    const int y = static_cast<int>(yi);
    for (int x = 0; x < px.width(); ++x) {
      const bool ok = flow.valid(x, y) != 0;
      for (int c = 0; c < px.channels(); ++c)
        out(x, y, c) = ok ? static_cast<float>(std::clamp(
                                bilinear_sample(px, x + flow.u(x, y), y + flow.v(x, y), c), 0.0, 1.0))
                          : px(x, y, c);
    }
  });
  return {NormalizedImage(std::move(out), img.domain()), flow.valid};
}

}  // namespace eshdr
