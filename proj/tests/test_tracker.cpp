#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "evtraj/dataset.hpp"
#include "evtraj/error.hpp"
#include "evtraj/event_sim.hpp"
#include "evtraj/seed.hpp"
#include "evtraj/tracker.hpp"
#include "oracles.hpp"

using namespace evtraj;

TEST(Tracker, InitState) {
  const auto s = tracker_init(20, 10);
  EXPECT_FALSE(s.initialized);
  EXPECT_EQ(s.accum_threshold, 10u);
  EXPECT_EQ(s.roi_size, 20.0);
  EXPECT_NO_THROW(tracker_init(1, 1));
  EXPECT_THROW(tracker_init(0, 10), InvalidArgument);
  EXPECT_THROW(tracker_init(-3, 10), InvalidArgument);
  EXPECT_THROW(tracker_init(20, 0), InvalidArgument);
}

TEST(Tracker, IdenticalEventsGiveThatPixel) {
  auto s = tracker_init(40, 10);
  std::optional<TrackPoint> out;
  for (int i = 0; i < 10; ++i) {
    ASSERT_FALSE(out);
    out = tracker_push(s, Event{50, 60, 100 + i, true});
  }
  ASSERT_TRUE(out);
  EXPECT_EQ(out->x, 50.0);
  EXPECT_EQ(out->y, 60.0);
  EXPECT_EQ(out->t_us, 109);
  EXPECT_TRUE(s.initialized);
  EXPECT_EQ(s.accum_count, 0u);
}

TEST(Tracker, SquareCentroid) {
  auto s = tracker_init(40, 4);
  tracker_push(s, {10, 10, 0, true});
  tracker_push(s, {12, 10, 1, true});
  tracker_push(s, {10, 12, 2, true});
  const auto p = tracker_push(s, {12, 12, 3, true});
  ASSERT_TRUE(p);
  EXPECT_EQ(p->x, 11.0);
  EXPECT_EQ(p->y, 11.0);
}

TEST(Tracker, FirstWindowIsWholePlaneThenRoi) {
  auto s = tracker_init(10, 1);
  EXPECT_TRUE(tracker_push(s, {300, 5, 0, true}));
  // far away: dropped once locked
  EXPECT_FALSE(tracker_push(s, {0, 200, 1, true}));
  // edge of the 10 px square is inclusive
  const auto p = tracker_push(s, {295, 10, 2, true});
  ASSERT_TRUE(p);
  EXPECT_EQ(p->x, 295.0);
}

TEST(Tracker, ThresholdOneUpdatesOnEveryAcceptedEvent) {
  auto s = tracker_init(40, 1);
  for (int i = 0; i < 10; ++i) EXPECT_TRUE(tracker_push(s, {static_cast<std::uint16_t>(100 + i), 50, i, true}));
}

TEST(Tracker, MatchesReferenceOracle) {
  std::mt19937_64 rng(25);
  std::vector<Event> ev;
  // random walk cloud so the ROI keeps catching events
  double cx = 150, cy = 120;
  std::normal_distribution<double> spread(0.0, 12.0), walk(0.0, 1.5);
  for (int i = 0; i < 1000; ++i) {
    cx = std::clamp(cx + walk(rng), 20.0, 280.0);
    cy = std::clamp(cy + walk(rng), 20.0, 220.0);
    const int x = std::clamp(static_cast<int>(std::lround(cx + spread(rng))), 0, kSensorWidth - 1);
    const int y = std::clamp(static_cast<int>(std::lround(cy + spread(rng))), 0, kSensorHeight - 1);
    ev.push_back({static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), i * 10, (i % 2) == 0});
  }
  const auto got = track_stream(ev, 40, 25);
  const auto want = oracle::track(ev, 40, 25);
  ASSERT_EQ(got.size(), want.size());
  ASSERT_GT(got.size(), 10u);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].x, want[i].x);
    EXPECT_EQ(got[i].y, want[i].y);
    EXPECT_EQ(got[i].t_us, want[i].t_us);
  }
}

TEST(Tracker, EmptyAndUnsortedStreams) {
  EXPECT_TRUE(track_stream({}, 40, 20).empty());
  const std::vector<Event> bad{{1, 1, 10, true}, {1, 1, 5, true}};
  EXPECT_THROW(track_stream(bad, 40, 20), InvalidArgument);
}

TEST(Tracker, FoldEqualsStream) {
  SimConfig c;
  c.seed = 3;
  const auto states = simulate_trajectory(c, BallState{{20, 50}, {250, 0}, 0}, 0.6, 0.0005);
  const auto ev = generate_events(states, c);
  auto s = tracker_init();
  std::vector<TrackPoint> fold;
  for (const auto& e : ev) {
    if (auto p = tracker_push(s, e)) fold.push_back(*p);
  }
  const auto stream = track_stream(ev);
  ASSERT_EQ(fold.size(), stream.size());
  for (std::size_t i = 0; i < fold.size(); ++i) {
    EXPECT_EQ(fold[i].x, stream[i].x);
    EXPECT_EQ(fold[i].t_us, stream[i].t_us);
  }
}

TEST(Tracker, NoiseFreeTrackStaysOnTheBall) {
  CorpusSpec spec;
  spec.seed = 17;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto track = simulate_source(spec, i);
    ASSERT_GT(track.points.size(), 50u);
    for (const auto& p : track.points) {
      const Vec2 c = interpolate_centre(track.truth, static_cast<double>(p.t_us) * 1e-6);
      ASSERT_LE(std::hypot(p.x - c.x, p.y - c.y), spec.sim.ball_radius) << "source " << i;
    }
  }
}

TEST(Tracker, TenPercentNoiseMostlyOnTheBall) {
  CorpusSpec spec;
  spec.seed = 23;
  std::size_t within = 0, total = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    // noise events make up 10% of the stream
    const auto clean = simulate_source(spec, i);
    SimConfig sim = spec.sim;
    sim.seed = derive_seed(spec.seed, seed_stream::kSimulator, i) + 1;
    const auto& truth = clean.truth;
    const auto signal = generate_events(truth, sim);
    const double span = truth.back().time - truth.front().time;
    sim.noise_rate = 0.1 * static_cast<double>(signal.size()) / span / 0.9;
    const auto noisy = generate_events(truth, sim);
    const auto pts = track_stream(noisy);
    for (const auto& p : pts) {
      const Vec2 c = interpolate_centre(truth, static_cast<double>(p.t_us) * 1e-6);
      within += std::hypot(p.x - c.x, p.y - c.y) <= spec.sim.ball_radius + 2.0;
      ++total;
    }
  }
  ASSERT_GT(total, 1000u);
  EXPECT_GE(static_cast<double>(within) / static_cast<double>(total), 0.95);
}

TEST(Tracker, RejectsOffSensorEvents) {
  auto s = tracker_init();
  EXPECT_THROW(tracker_push(s, {400, 1, 0, true}), InvalidArgument);
}
