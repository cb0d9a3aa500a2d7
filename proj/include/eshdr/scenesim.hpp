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
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "eshdr/eventsim.hpp"
#include "eshdr/image.hpp"
#include "eshdr/parallel.hpp"
#include "eshdr/random.hpp"
#include "eshdr/transfer.hpp"

namespace eshdr {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Per-step shift of one layer, in pixels.
struct MotionState {
  Vec2 shift;
  friend bool operator==(const MotionState&, const MotionState&) = default;
};

/// s' = alpha * s + (1 - alpha) * draw
inline MotionState step_motion(MotionState s, double alpha_smooth, Vec2 draw) {
  return {alpha_smooth * s.shift + (1.0 - alpha_smooth) * draw};
}

/// Uniform draws on [-bound, bound]^2, one generator per (seed, layer).
class MotionSampler {
 public:
  MotionSampler(std::uint64_t seed, std::uint64_t layer, double bound)
      : engine_(splitmix64(seed ^ splitmix64(layer + 1))), dist_(-bound, bound), bound_(bound) {}

  Vec2 draw() {
    if (bound_ == 0.0) return {};
    const double x = dist_(engine_);
    const double y = dist_(engine_);
    return {x, y};
  }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> dist_;
  double bound_;
};

inline MotionState step_motion(MotionState s, double alpha_smooth, MotionSampler& sampler) {
  return step_motion(s, alpha_smooth, sampler.draw());
}

/// Cumulative layer offsets: position[0] = 0, position[k] = sum of shifts 1..k.
struct Trajectory {
  std::vector<Vec2> shift;
  std::vector<Vec2> position;

  double extent() const {
    double m = 0.0;
    for (const Vec2& p : position) m = std::max({m, std::abs(p.x), std::abs(p.y)});
    return m;
  }
};

inline Trajectory motion_trajectory(std::size_t frame_count, double alpha_smooth,
                                    double motion_bound, std::uint64_t seed,
                                    std::uint64_t layer) {
  Trajectory traj;
  traj.shift.reserve(frame_count);
  traj.position.reserve(frame_count);
  MotionSampler sampler(seed, layer, motion_bound);
  MotionState s;
  Vec2 pos;
  for (std::size_t k = 0; k < frame_count; ++k) {
    if (k > 0) {
      s = step_motion(s, alpha_smooth, sampler);
      pos = pos + s.shift;
    }
    traj.shift.push_back(s.shift);
    traj.position.push_back(pos);
  }
  return traj;
}

/// Constant-velocity trajectory, used when a test forces the motion.
inline Trajectory constant_trajectory(std::size_t frame_count, Vec2 shift) {
  Trajectory traj;
  for (std::size_t k = 0; k < frame_count; ++k) {
    traj.shift.push_back(k == 0 ? Vec2{} : shift);
    traj.position.push_back(static_cast<double>(k) * shift);
  }
  return traj;
}

/// Smooth random field exp(sum of sinusoids) with a dynamic range of about
/// 2^stops, scaled so its maximum is near `peak`.
inline Image<float> procedural_radiance(int width, int height, int channels, std::uint64_t seed,
                                        double stops = 6.0, double peak = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.1, 1.0), phase(0.0, 6.283185307179586),
      tint(0.7, 1.0);
  struct Wave {
    double fx, fy, ph;
  };
  constexpr int kWaves = 24;
  std::vector<Wave> waves;
  for (int i = 0; i < kWaves; ++i) {
    const double f = freq(rng), ang = phase(rng);
    waves.push_back({f * std::cos(ang), f * std::sin(ang), phase(rng)});
  }
  std::vector<double> tints;
  for (int c = 0; c < channels; ++c) tints.push_back(tint(rng));
  Image<float> out(width, height, channels);
  const double half = 0.5 * stops * std::log(2.0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (const auto& w : waves) s += std::sin(w.fx * x + w.fy * y + w.ph);
      const double v = peak * std::exp(half * (s / std::sqrt(2.0 * kWaves) - 1.0));
      for (int c = 0; c < channels; ++c)
        out(x, y, c) = static_cast<float>(v * tints[static_cast<std::size_t>(c)]);
    }
  return out;
}

struct Foreground {
  RadianceImage image;
  Image<float> alpha;  // single channel, same size as image, values in [0, 1]
};

struct SceneSpec {
  RadianceImage background;
  std::optional<Foreground> foreground;
  double alpha_smooth = 0.99;
  double motion_bound = 0.5;
  std::size_t frame_count = 2;
  TimeNs frame_interval = 100'000;
  std::uint64_t seed = 0;
  /// Output size; when unset the background is cropped by
  /// ceil(motion_bound * frame_count) on every side.
  std::optional<std::pair<int, int>> crop;

  void validate() const {
    require(background.width() > 0, ErrorCategory::validation, "scene has no background");
    require(alpha_smooth >= 0.0 && alpha_smooth <= 1.0, ErrorCategory::validation,
            "alpha_smooth must lie in [0, 1]");
    require(std::isfinite(motion_bound) && motion_bound >= 0.0, ErrorCategory::validation,
            "motion_bound must be non-negative");
    require(frame_count >= 2, ErrorCategory::validation, "scene needs at least two frames");
    require(frame_interval > 0, ErrorCategory::validation, "frame interval must be positive");
    if (foreground) {
      const auto& fg = *foreground;
      require(fg.alpha.channels() == 1 && fg.alpha.same_size(fg.image.pixels()),
              ErrorCategory::validation, "alpha matte must be single-channel and match the foreground");
      require(fg.image.channels() == background.channels(), ErrorCategory::validation,
              "foreground and background channel counts differ");
      for (float a : fg.alpha.samples())
        require(std::isfinite(a) && a >= 0.0f && a <= 1.0f, ErrorCategory::validation,
                "alpha matte values must lie in [0, 1]");
    }
  }
};

namespace detail {

/// Bilinear sample where taps outside the image contribute zero.
inline double bilinear_sample_zero(const Image<float>& img, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto tap = [&](int xi, int yi) -> double {
    if (xi < 0 || yi < 0 || xi >= img.width() || yi >= img.height()) return 0.0;
    return img(xi, yi);
  };
  return (1.0 - fy) * ((1.0 - fx) * tap(x0, y0) + fx * tap(x0 + 1, y0)) +
         fy * ((1.0 - fx) * tap(x0, y0 + 1) + fx * tap(x0 + 1, y0 + 1));
}

}  // namespace detail

/// Renders individual frames of a scene given precomputed layer trajectories.
class SceneRenderer {
 public:
  SceneRenderer(SceneSpec spec, Trajectory background, Trajectory foreground)
      : spec_(std::move(spec)), bg_(std::move(background)), fg_(std::move(foreground)) {
    spec_.validate();
    require(bg_.position.size() >= spec_.frame_count && fg_.position.size() >= spec_.frame_count,
            ErrorCategory::validation, "trajectory shorter than the frame count");
    const int bw = spec_.background.width();
    const int bh = spec_.background.height();
    if (spec_.crop) {
      width_ = spec_.crop->first;
      height_ = spec_.crop->second;
      const int margin = static_cast<int>(std::ceil(bg_.extent()));
      require(width_ >= 1 && height_ >= 1 && width_ + 2 * margin <= bw &&
                  height_ + 2 * margin <= bh,
              ErrorCategory::validation,
              "background " + std::to_string(bw) + "x" + std::to_string(bh) +
                  " is smaller than the " + std::to_string(width_) + "x" +
                  std::to_string(height_) + " crop plus a " + std::to_string(margin) +
                  " px motion margin");
    } else {
      const int margin = static_cast<int>(
          std::ceil(spec_.motion_bound * static_cast<double>(spec_.frame_count)));
      width_ = bw - 2 * margin;
      height_ = bh - 2 * margin;
      require(width_ >= 1 && height_ >= 1, ErrorCategory::validation,
              "background " + std::to_string(bw) + "x" + std::to_string(bh) +
                  " is smaller than the required crop margin of " + std::to_string(margin) +
                  " px per side");
    }
    origin_ = {static_cast<double>((bw - width_) / 2), static_cast<double>((bh - height_) / 2)};
    if (spec_.foreground) {
      const auto& fg = spec_.foreground->image;
      fg_origin_ = {static_cast<double>((width_ - fg.width()) / 2),
                    static_cast<double>((height_ - fg.height()) / 2)};
    }
  }

  explicit SceneRenderer(const SceneSpec& spec)
      : SceneRenderer(spec,
                      motion_trajectory(spec.frame_count, spec.alpha_smooth, spec.motion_bound,
                                        spec.seed, 0),
                      motion_trajectory(spec.frame_count, spec.alpha_smooth, spec.motion_bound,
                                        spec.seed, 1)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return spec_.frame_count; }
  const SceneSpec& spec() const noexcept { return spec_; }
  const Trajectory& background_trajectory() const noexcept { return bg_; }
  const Trajectory& foreground_trajectory() const noexcept { return fg_; }

  TimeNs timestamp(std::size_t k) const noexcept {
    return static_cast<TimeNs>(k) * spec_.frame_interval;
  }

  /// Frame k: translated background with the translated foreground composited over it.
  TimedFrame operator[](std::size_t k) const {
    const auto& bg = spec_.background.pixels();
    const int ch = bg.channels();
    Image<float> out(width_, height_, ch);
    const Vec2 pb = bg_.position[k];
    const Vec2 pf = fg_.position[k];
    parallel_for(0, height_, [&](std::ptrdiff_t yi) {
      const int y = static_cast<int>(yi);
      for (int x = 0; x < width_; ++x) {
        const double bx = origin_.x + x - pb.x;
        const double by = origin_.y + y - pb.y;
        double a = 0.0;
        double fx = 0.0;
        double fy = 0.0;
        if (spec_.foreground) {
          fx = x - fg_origin_.x - pf.x;
          fy = y - fg_origin_.y - pf.y;
          a = std::clamp(detail::bilinear_sample_zero(spec_.foreground->alpha, fx, fy), 0.0, 1.0);
        }
        for (int c = 0; c < ch; ++c) {
          const double b = bilinear_sample(bg, bx, by, c);
          double v = b;
          if (a > 0.0) {
            const double f = bilinear_sample(spec_.foreground->image.pixels(), fx, fy, c);
            v = a * f + (1.0 - a) * b;
          }
          out(x, y, c) = static_cast<float>(std::max(0.0, v));
        }
      }
    });
    return {RadianceImage(std::move(out)), timestamp(k)};
  }

 private:
  SceneSpec spec_;
  Trajectory bg_;
  Trajectory fg_;
  int width_ = 0;
  int height_ = 0;
  Vec2 origin_;
  Vec2 fg_origin_;
};

inline std::vector<TimedFrame> render_sequence(const SceneRenderer& renderer) {
  std::vector<TimedFrame> frames;
  frames.reserve(renderer.size());
  for (std::size_t k = 0; k < renderer.size(); ++k) frames.push_back(renderer[k]);
  return frames;
}

inline std::vector<TimedFrame> render_sequence(const SceneSpec& spec) {
  return render_sequence(SceneRenderer(spec));
}

}  // namespace eshdr
