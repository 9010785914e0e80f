#include <gtest/gtest.h>

#include <cmath>

#include "evtraj/error.hpp"
#include "evtraj/sampling.hpp"

using namespace evtraj;

namespace {

std::vector<TrackPoint> line(std::size_t n, double step_px, std::int64_t step_us) {
  std::vector<TrackPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({10.0 + step_px * static_cast<double>(i), 50.0, static_cast<std::int64_t>(i) * step_us});
  }
  return pts;
}

}  // namespace

TEST(Subsample, FixedRateThreshold) {
  const std::vector<TrackPoint> pts{{0, 0, 0}, {1, 0, 5000}, {2, 0, 10000}, {3, 0, 15000}};
  const auto s = subsample(pts, FixedRate{10.0});
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_EQ(s.points[0].t_us, 0);
  EXPECT_EQ(s.points[1].t_us, 10000);
}

TEST(Subsample, SpatialThreshold) {
  const auto s = subsample(line(10, 0.5, 1000), Spatial{2.0});
  // kept at x = 10, 12, 14
  ASSERT_EQ(s.points.size(), 3u);
  EXPECT_EQ(s.points[1].x, 12.0);
  EXPECT_EQ(s.points[2].x, 14.0);
}

TEST(Subsample, SpatialUsesEuclideanDistance) {
  const std::vector<TrackPoint> pts{{0, 0, 0}, {3, 3, 1}, {3, 4, 2}, {6, 8, 3}};
  const auto s = subsample(pts, Spatial{5.0});
  ASSERT_EQ(s.points.size(), 3u);
  EXPECT_EQ(s.points[1].y, 4.0);
  EXPECT_EQ(s.points[2].y, 8.0);
}

TEST(Subsample, FirstPointAlwaysAndEmptyInput) {
  EXPECT_TRUE(subsample(std::vector<TrackPoint>{}, Spatial{2}).points.empty());
  const std::vector<TrackPoint> one{{5, 5, 7}};
  EXPECT_EQ(subsample(one, FixedRate{100}).points.size(), 1u);
}

TEST(Subsample, SameTimestampNeverKeptTwice) {
  const std::vector<TrackPoint> pts{{0, 0, 0}, {10, 0, 0}, {20, 0, 1}};
  const auto s = subsample(pts, Spatial{2});
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_EQ(s.points[1].x, 20.0);
}

TEST(Subsample, SpatialCountNotMonotoneWhenPathDoublesBack) {
  // Greedy first crossing: D=1 anchors at x=1 and never escapes it, while
  // D=1.5 anchors at x=1.9 and then reaches x=0.1.
  const std::vector<TrackPoint> pts{{0, 0, 0}, {1.0, 0, 1}, {1.9, 0, 2}, {0.1, 0, 3}};
  EXPECT_EQ(subsample(pts, Spatial{1.0}).points.size(), 2u);
  EXPECT_EQ(subsample(pts, Spatial{1.5}).points.size(), 3u);
}

TEST(Subsample, RejectsBadStrategyOrOrder) {
  const auto pts = line(5, 1, 10);
  EXPECT_THROW(subsample(pts, Spatial{0}), InvalidArgument);
  EXPECT_THROW(subsample(pts, FixedRate{-1}), InvalidArgument);
  EXPECT_THROW(subsample(pts, Spatial{NAN}), InvalidArgument);
  const std::vector<TrackPoint> back{{0, 0, 10}, {0, 0, 5}};
  EXPECT_THROW(subsample(back, Spatial{1}), InvalidArgument);
}

TEST(Describe, Labels) {
  EXPECT_EQ(describe(FixedRate{10}), "fixed:10ms");
  EXPECT_EQ(describe(Spatial{2.5}), "spatial:2.5px");
}

TEST(MeanRate, UniformGaps) {
  SampledSequence s{line(11, 1, 10000), Spatial{1}};
  const auto r = mean_rate(s);
  EXPECT_DOUBLE_EQ(r.mean_hz, 100.0);
  EXPECT_NEAR(r.std_hz, 0.0, 1e-9);
}

TEST(MeanRate, MixedGaps) {
  SampledSequence s{{{0, 0, 0}, {1, 0, 10000}, {2, 0, 40000}}, Spatial{1}};
  const auto r = mean_rate(s);
  EXPECT_NEAR(r.mean_hz, (100.0 + 1000.0 / 30.0) / 2.0, 1e-9);
  EXPECT_NEAR(r.mean_hz, 66.6667, 1e-4);
  EXPECT_NEAR(r.std_hz, (100.0 - 1000.0 / 30.0) / 2.0, 1e-9);
}

TEST(MeanRate, NeedsTwoPoints) {
  SampledSequence s{{{0, 0, 0}}, Spatial{1}};
  EXPECT_THROW(mean_rate(s), InvalidArgument);
}

TEST(MatchedRate, UniformMotionGivesReciprocal) {
  // 1 px per 5 ms, so D = 2 keeps one point every 10 ms
  const std::vector<std::vector<TrackPoint>> set{line(200, 1.0, 5000)};
  const std::vector<double> d{2.0};
  const auto m = matched_rate_pairs(set, d);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_DOUBLE_EQ(m[0].delta_px, 2.0);
  EXPECT_DOUBLE_EQ(m[0].mean_rate_hz, 100.0);
  EXPECT_DOUBLE_EQ(m[0].period_ms, 10.0);
  EXPECT_TRUE(matched_rate_pairs(set, std::vector<double>{}).empty());
}
