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
#include <map>

#include "eshdr/eventsim.hpp"
#include "support/synthetic.hpp"

namespace eshdr {
namespace {

std::vector<TimedFrame> one_pixel(std::vector<double> values, TimeNs dt) {
  std::vector<TimedFrame> seq;
  for (std::size_t k = 0; k < values.size(); ++k)
    seq.push_back({RadianceImage(Image<float>(1, 1, 1, static_cast<float>(values[k]))),
                   static_cast<TimeNs>(k) * dt});
  return seq;
}

TEST(SimulateEvents, ConstantSequenceIsSilent) {
  std::vector<TimedFrame> seq;
  for (int k = 0; k < 5; ++k)
    seq.push_back({RadianceImage(testing::textured_radiance(6, 6, 3, 1)), k * 1000});
  EXPECT_EQ(simulate_events(seq).size(), 0u);
}

TEST(SimulateEvents, TwoPositiveCrossings) {
  // ln I rises by 0.5 over 1 ms; levels +0.2 and +0.4 are crossed at 40% and 80%.
  const auto stream = simulate_events(one_pixel({0.1, 0.1 * std::exp(0.5)}, 1'000'000));
  ASSERT_EQ(stream.size(), 2u);
  EXPECT_EQ(stream.events()[0], (Event{400'000, 0, 0, 1}));
  EXPECT_EQ(stream.events()[1], (Event{800'000, 0, 0, 1}));
}

TEST(SimulateEvents, MirroredDecrease) {
  const auto stream = simulate_events(one_pixel({0.1 * std::exp(0.5), 0.1}, 1'000'000));
  ASSERT_EQ(stream.size(), 2u);
  EXPECT_EQ(stream.events()[0], (Event{400'000, 0, 0, -1}));
  EXPECT_EQ(stream.events()[1], (Event{800'000, 0, 0, -1}));
}

TEST(SimulateEvents, ReferenceMovesByExactlyC) {
  // Up by 0.3 then back down by 0.3: one event each way (levels +0.2 then 0).
  const auto stream = simulate_events(one_pixel({1.0, std::exp(0.3), 1.0}, 1000));
  ASSERT_EQ(stream.size(), 2u);
  EXPECT_EQ(stream.events()[0].polarity, 1);
  EXPECT_EQ(stream.events()[1].polarity, -1);
}

TEST(SimulateEvents, LogFloorGuardsZero) {
  const auto stream = simulate_events(one_pixel({0.0, 1e-4 * std::exp(0.45)}, 1000));
  EXPECT_EQ(stream.size(), 2u);
}

TEST(SimulateEvents, RejectsNonIncreasingTimes) {
  auto seq = one_pixel({1.0, 2.0, 3.0}, 1000);
  seq[2].timestamp = 1000;
  EXPECT_THROW(simulate_events(seq), Error);
  EXPECT_THROW(simulate_events(one_pixel({1.0}, 1000)), Error);
}

TEST(SimulateEvents, MatchesBruteForceEnumerator) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto seq = testing::random_sequence(8, 8, 10, seed, 10'000);
    const auto stream = simulate_events(seq);
    const auto expected = testing::enumerate_events(seq, 0.2, 1e-4);
    ASSERT_EQ(stream.size(), expected.size()) << seed;
    for (std::size_t i = 0; i < expected.size(); ++i) ASSERT_EQ(stream.events()[i], expected[i]);
  }
}

TEST(SimulateEvents, TimesInsideSegmentsAndOrderedPerPixel) {
  const auto seq = testing::random_sequence(8, 8, 10, 99, 1000);
  const auto stream = simulate_events(seq);
  std::map<std::pair<int, int>, TimeNs> last;
  for (const Event& e : stream.events()) {
    EXPECT_GT(e.t, 0);
    EXPECT_LT(e.t, 9000);
    EXPECT_NE(e.t % 1000, 0);
    auto [it, fresh] = last.try_emplace({e.x, e.y}, e.t);
    if (!fresh) {
      EXPECT_GT(e.t, it->second);
      it->second = e.t;
    }
  }
}

TEST(SimulateEvents, IntegrationBoundFromStart) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto seq = testing::random_sequence(8, 8, 10, 100 + seed, 1000);
    const EventIndex index(simulate_events(seq));
    for (std::size_t b = 0; b < seq.size(); ++b) {
      const auto pred = predict_log_change(index, seq[0].timestamp, seq[b].timestamp);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          const double truth = std::log(std::max<double>(seq[b].image(x, y), 1e-4)) -
                               std::log(std::max<double>(seq[0].image(x, y), 1e-4));
          EXPECT_LT(std::abs(pred(x, y) - truth), 0.2);
        }
    }
  }
}

// Between two later frames both endpoints carry a residual below c, so the
// bound doubles. The sequence 0 -> 0.39 -> 0.01 in log units reaches it.
TEST(SimulateEvents, IntegrationBoundBetweenFrames) {
  const auto seq = one_pixel({1.0, std::exp(0.39), std::exp(0.01)}, 1000);
  const auto pred = predict_log_change(simulate_events(seq), 1000, 2000);
  EXPECT_EQ(pred(0, 0), 0.0f);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto rs = testing::random_sequence(8, 8, 10, 200 + seed, 1000);
    const EventIndex index(simulate_events(rs));
    for (std::size_t a = 0; a < rs.size(); ++a)
      for (std::size_t b = a; b < rs.size(); ++b) {
        const auto p = predict_log_change(index, rs[a].timestamp, rs[b].timestamp);
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            const double truth = std::log(std::max<double>(rs[b].image(x, y), 1e-4)) -
                                 std::log(std::max<double>(rs[a].image(x, y), 1e-4));
            EXPECT_LT(std::abs(p(x, y) - truth), 0.4);
          }
      }
  }
}

TEST(SimulateEvents, LargerThresholdNeverAddsEvents) {
  const auto seq = testing::random_sequence(8, 8, 10, 5, 1000);
  const EventIndex fine(simulate_events(seq, {0.2, 1e-4}));
  const EventIndex coarse(simulate_events(seq, {0.4, 1e-4}));
  for (std::size_t p = 0; p < 64; ++p)
    EXPECT_LE(coarse.event_count(p, 0, 10'000), fine.event_count(p, 0, 10'000));
}

TEST(SimulateEvents, ThreadCountIndependent) {
  const auto seq = testing::random_sequence(16, 16, 8, 21, 1000);
  set_thread_count(1);
  const auto a = simulate_events(seq);
  set_thread_count(4);
  const auto b = simulate_events(seq);
  set_thread_count(0);
  EXPECT_EQ(a.events(), b.events());
}

TEST(Accumulate, IntervalsAndAntisymmetry) {
  const auto stream = simulate_events(one_pixel({0.1, 0.1 * std::exp(0.5)}, 1'000'000));
  EXPECT_EQ(accumulate_polarity(stream, 0, 1'000'000)(0, 0), 2);
  EXPECT_EQ(accumulate_polarity(stream, 1'000'000, 0)(0, 0), -2);
  EXPECT_EQ(accumulate_polarity(stream, 500, 500)(0, 0), 0);
  EXPECT_EQ(accumulate_polarity(stream, 0, 400'000)(0, 0), 0);
  EXPECT_EQ(accumulate_polarity(stream, 400'000, 400'001)(0, 0), 1);
  EXPECT_NEAR(predict_log_change(stream, 0, 1'000'000)(0, 0), 0.4, 1e-7);
  EXPECT_EQ(predict_log_change(stream, 0, 1)(0, 0), 0.0f);
}

TEST(EventStream, ValidatesOrderAndBounds) {
  EXPECT_THROW(EventStream(4, 4, 0.2, 1e-4, {{10, 0, 0, 1}, {5, 0, 0, 1}}), Error);
  EXPECT_THROW(EventStream(4, 4, 0.2, 1e-4, {{10, 4, 0, 1}}), Error);
  EXPECT_THROW(EventStream(4, 4, 0.2, 1e-4, {{10, 0, 0, 0}}), Error);
  EXPECT_THROW(EventStream(4, 4, 0.0, 1e-4, {}), Error);
  EXPECT_NO_THROW(EventStream(4, 4, 0.2, 1e-4, {{5, 1, 0, 1}, {5, 0, 1, -1}}));
}

}  // namespace
}  // namespace eshdr
