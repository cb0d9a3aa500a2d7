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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eshdr/image.hpp"
#include "eshdr/transfer.hpp"

namespace eshdr {
namespace {

NormalizedImage constant(float v, Domain d, int w = 2, int h = 2, int ch = 1) {
  return NormalizedImage(Image<float>(w, h, ch, v), d);
}

TEST(Image, RejectsNonPositiveSize) {
  EXPECT_THROW(Image<float>(0, 3, 1), Error);
  EXPECT_THROW(Image<float>(3, 3, 0), Error);
}

TEST(Image, InterleavedIndexing) {
  Image<float> img(3, 2, 3);
  img(2, 1, 1) = 7.f;
  EXPECT_EQ(img.index(2, 1, 1), (1u * 3 + 2) * 3 + 1);
  EXPECT_EQ(img.samples()[img.index(2, 1, 1)], 7.f);
}

TEST(RadianceImage, Validates) {
  EXPECT_THROW(RadianceImage(Image<float>(2, 2, 1, -1.f)), Error);
  EXPECT_THROW(RadianceImage(Image<float>(2, 2, 1, NAN)), Error);
  EXPECT_THROW(RadianceImage(Image<float>(2, 2, 2, 0.f)), Error);
  EXPECT_NO_THROW(RadianceImage(Image<float>(2, 2, 3, 1e6f)));
}

TEST(NormalizedImage, RejectsOutOfRange) {
  EXPECT_THROW(constant(1.5f, Domain::linear), Error);
  EXPECT_THROW(constant(-0.1f, Domain::linear), Error);
}

TEST(LdrFrame, Validates) {
  EXPECT_THROW(LdrFrame(Image<std::uint8_t>(2, 2, 3), {0.0, 0.0, 0}), Error);
  EXPECT_THROW(LdrFrame(Image<std::uint8_t>(2, 2, 3), {0.0, 1e-3, -1}), Error);
  const LdrFrame f(Image<std::uint8_t>(2, 2, 3), {3.0, 1e-3, 500});
  EXPECT_EQ(f.info().end(), 500 + 1'000'000);
}

TEST(Gamma, Endpoints) {
  EXPECT_EQ(gamma_decode(0.0, 2.4), 0.0);
  EXPECT_EQ(gamma_decode(1.0, 2.4), 1.0);
  EXPECT_EQ(gamma_encode(0.0, 2.4), 0.0);
  EXPECT_EQ(gamma_encode(1.0, 2.4), 1.0);
}

TEST(Gamma, HalfDecodes) {
  EXPECT_NEAR(gamma_decode(0.5, 2.4), 0.18946457081379976, 1e-15);
}

TEST(Gamma, RoundTripDouble) {
  double worst = 0.0;
  for (int i = 0; i < 1024; ++i) {
    const double v = i / 1023.0;
    worst = std::max(worst, std::abs(gamma_encode(gamma_decode(v, 2.4), 2.4) - v));
    worst = std::max(worst, std::abs(gamma_decode(gamma_encode(v, 2.4), 2.4) - v));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Gamma, ImageRoundTripAndTags) {
  Image<double> px(1024, 1, 1);
  for (int i = 0; i < 1024; ++i) px(i, 0) = i / 1023.0;
  const BasicNormalizedImage<double> enc(px, Domain::gamma_encoded);
  const auto lin = gamma_decode(enc);
  EXPECT_EQ(lin.domain(), Domain::linear);
  const auto back = gamma_encode(lin);
  EXPECT_EQ(back.domain(), Domain::gamma_encoded);
  for (int i = 0; i < 1024; ++i) EXPECT_NEAR(back(i, 0), px(i, 0), 1e-12);
}

TEST(Gamma, WrongTagIsDomainMismatch) {
  try {
    gamma_decode(constant(0.5f, Domain::linear));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::domain_mismatch);
  }
  EXPECT_THROW(gamma_encode(constant(0.5f, Domain::mu_law)), Error);
  EXPECT_THROW(gamma_decode(constant(0.5f, Domain::gamma_encoded), 0.0), Error);
}

TEST(MuLaw, KnownValues) {
  EXPECT_EQ(mu_law(0.0, 5000.0), 0.0);
  EXPECT_EQ(mu_law(1.0, 5000.0), 1.0);
  EXPECT_NEAR(mu_law(0.01, 5000.0), 0.46162312266128805, 1e-12);
}

TEST(MuLaw, ImageEndpointsExactAndTagged) {
  Image<float> img(2, 1, 1);
  img(0, 0) = 0.f;
  img(1, 0) = 1.f;
  const auto out = mu_law(img);
  EXPECT_EQ(out.domain(), Domain::mu_law);
  EXPECT_EQ(out(0, 0), 0.f);
  EXPECT_EQ(out(1, 0), 1.f);
}

TEST(MuLaw, RejectsUnnormalizedInput) {
  try {
    mu_law(Image<float>(1, 1, 1, 1.5f));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::validation);
  }
}

TEST(MuLaw, StrictlyMonotone) {
  for (double mu : {0.5, 10.0, 5000.0, 1e6}) {
    double prev = -1.0;
    for (int i = 0; i <= 2000; ++i) {
      const double y = mu_law(i / 2000.0, mu);
      EXPECT_GT(y, prev);
      prev = y;
    }
  }
}

TEST(ExposureAlign, UnitRatioIsBitIdentical) {
  Image<float> px(16, 16, 3);
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  for (float& v : px.samples()) v = u(rng);
  const NormalizedImage img(px, Domain::gamma_encoded);
  EXPECT_EQ(exposure_align(img, 0.004, 0.004), img);
}

TEST(ExposureAlign, KnownValues) {
  const auto up = exposure_align(constant(0.5f, Domain::gamma_encoded), 8.0, 1.0);
  EXPECT_EQ(up(0, 0), 1.0f);
  const auto down = exposure_align(constant(0.5f, Domain::gamma_encoded), 1.0, 8.0);
  EXPECT_NEAR(down(0, 0), 0.21022410381342864, 1e-6);
}

TEST(ExposureAlign, InverseWhereUnclipped) {
  Image<double> px(256, 1, 1);
  for (int i = 0; i < 256; ++i) px(i, 0) = i / 255.0;
  const BasicNormalizedImage<double> img(px, Domain::gamma_encoded);
  for (double r : {0.125, 0.5, 2.0, 8.0}) {
    const auto there = exposure_align(img, r, 1.0);
    const auto back = exposure_align(there, 1.0, r);
    for (int i = 0; i < 256; ++i)
      if (std::pow(px(i, 0), 2.4) * r < 1.0) {
        EXPECT_NEAR(back(i, 0), px(i, 0), 1e-12);
      }
  }
}

TEST(ExposureAlign, RejectsBadTimes) {
  EXPECT_THROW(exposure_align(constant(0.5f, Domain::gamma_encoded), 0.0, 1.0), Error);
  EXPECT_THROW(exposure_align(constant(0.5f, Domain::gamma_encoded), 1.0, -1.0), Error);
}

TEST(Bilinear, IntegerMidpointAndClamp) {
  Image<float> img(2, 2, 1);
  img(0, 0) = 0.25f;
  img(1, 0) = 1.f;
  img(0, 1) = 0.f;
  img(1, 1) = 0.5f;
  EXPECT_EQ(bilinear_sample(img, 1.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(bilinear_sample(img, 0.5, 1.0), 0.25);
  EXPECT_EQ(bilinear_sample(img, -5.0, -5.0), 0.25);
  EXPECT_EQ(bilinear_sample(img, 9.0, -5.0), 1.0);
}

TEST(Bilinear, MidpointOfZeroAndOne) {
  Image<float> img(2, 1, 1);
  img(1, 0) = 1.f;
  EXPECT_EQ(bilinear_sample(NormalizedImage(img, Domain::linear), 0.5, 0.0), 0.5);
}

}  // namespace
}  // namespace eshdr
