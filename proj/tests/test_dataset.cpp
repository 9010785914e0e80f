#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "evtraj/dataset.hpp"
#include "evtraj/error.hpp"

using namespace evtraj;

namespace {

SampledSequence seq_of_length(std::size_t n) {
  SampledSequence s{{}, Spatial{2}};
  for (std::size_t i = 0; i < n; ++i) {
    s.points.push_back({static_cast<double>(i), 2.0 * static_cast<double>(i), static_cast<std::int64_t>(i * i) * 100});
  }
  return s;
}

TrajectoryCorpus toy_corpus(std::size_t sources) {
  TrajectoryCorpus c;
  for (std::size_t i = 0; i < sources; ++i) {
    CorpusEntry e;
    e.sequence = seq_of_length(10);
    e.source_id = i;
    c.entries.push_back(e);
    e.sequence = flip_augment(e.sequence);
    e.flipped = true;
    c.entries.push_back(e);
  }
  return c;
}

}  // namespace

TEST(Flip, Examples) {
  SampledSequence s{{{0, 5, 1}, {151.5, 7, 2}, {303, 9, 3}}, Spatial{1}};
  const auto f = flip_augment(s);
  EXPECT_EQ(f.points[0].x, 303.0);
  EXPECT_EQ(f.points[1].x, 151.5);
  EXPECT_EQ(f.points[2].x, 0.0);
  EXPECT_EQ(f.points[0].y, 5.0);
  EXPECT_EQ(f.points[2].t_us, 3);
  const auto back = flip_augment(f);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back.points[i].x, s.points[i].x);
}

TEST(Splits, DefaultRatiosGive470To20To10) {
  const auto c = make_splits(toy_corpus(250), SplitRatios{}, 1);
  EXPECT_EQ(c.entries.size(), 500u);
  EXPECT_EQ(c.count(Split::Train), 470u);
  EXPECT_EQ(c.count(Split::Validation), 20u);
  EXPECT_EQ(c.count(Split::Test), 10u);
}

TEST(Splits, DeterministicAndLeakFree) {
  const auto a = make_splits(toy_corpus(10), SplitRatios{}, 7);
  const auto b = make_splits(toy_corpus(10), SplitRatios{}, 7);
  std::map<std::size_t, std::set<Split>> by_source;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].split, b.entries[i].split);
    by_source[a.entries[i].source_id].insert(a.entries[i].split);
  }
  for (const auto& [id, s] : by_source) EXPECT_EQ(s.size(), 1u) << "source " << id;
  EXPECT_GE(a.count(Split::Validation), 2u);
  EXPECT_GE(a.count(Split::Test), 2u);
}

TEST(Splits, TooFewSources) {
  EXPECT_THROW(make_splits(toy_corpus(2), SplitRatios{}, 1), InvalidArgument);
  EXPECT_NO_THROW(assign_source_splits(3, SplitRatios{1, 1, 1}, 1));
  // validation and test would leave no training source
  EXPECT_THROW(assign_source_splits(4, SplitRatios{1, 2, 2}, 1), InvalidArgument);
  EXPECT_THROW(assign_source_splits(10, SplitRatios{1, 0, 1}, 1), InvalidArgument);
}

TEST(Splits, ParseRoundTrip) {
  for (Split s : {Split::Train, Split::Validation, Split::Test}) EXPECT_EQ(parse_split(to_string(s)), s);
  EXPECT_THROW(parse_split("dev"), FormatError);
}

TEST(Windows, Counts) {
  EXPECT_EQ(make_windows(seq_of_length(65), 20, 45).size(), 1u);
  EXPECT_EQ(make_windows(seq_of_length(64), 20, 45).size(), 0u);
  EXPECT_EQ(make_windows(seq_of_length(100), 20, 45, 10).size(), 4u);
  EXPECT_THROW(make_windows(seq_of_length(10), 0, 2), InvalidArgument);
  EXPECT_THROW(make_windows(seq_of_length(10), 2, 2, 0), InvalidArgument);
}

TEST(Windows, CountingOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t L = rng() % 80, w_in = 1 + rng() % 20, w_out = 1 + rng() % 30;
    std::size_t expected = 0;
    for (std::size_t off = 0; off + w_in + w_out <= L; ++off) ++expected;
    EXPECT_EQ(make_windows(seq_of_length(L), w_in, w_out).size(), expected);
  }
}

TEST(Windows, ContiguousAndAdjacent) {
  const auto s = seq_of_length(30);
  const auto ws = make_windows(s, 5, 4, 3, 9);
  for (const auto& w : ws) {
    EXPECT_EQ(w.source_id, 9u);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(w.input[k].x, s.points[w.offset + k].x);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(w.target[k].x, s.points[w.offset + 5 + k].x);
    // first dT comes from the sample before the window
    const double dt0 = w.offset == 0 ? 0.0 : (s.points[w.offset].t_us - s.points[w.offset - 1].t_us) / 1000.0;
    EXPECT_DOUBLE_EQ(w.input[0].dt_ms, dt0);
  }
}

TEST(Corpus, SyntheticSourcesAndManifest) {
  CorpusSpec spec;
  spec.count = 6;
  spec.seed = 5;
  const auto tracks = generate_raw_tracks(spec);
  ASSERT_EQ(tracks.size(), 6u);
  for (const auto& t : tracks) EXPECT_GT(t.points.size(), 100u);
  const auto again = simulate_source(spec, 3);
  ASSERT_EQ(again.points.size(), tracks[3].points.size());
  EXPECT_EQ(again.points.back().x, tracks[3].points.back().x);

  const auto splits = assign_source_splits(tracks.size(), SplitRatios{}, 1);
  const auto corpus = build_corpus(tracks, Spatial{2}, splits);
  EXPECT_EQ(corpus.entries.size(), 12u);
  EXPECT_EQ(corpus.entries[0].provenance, "synthetic:seed=" + std::to_string(tracks[0].seed));
  EXPECT_TRUE(corpus.entries[1].flipped);
  EXPECT_EQ(corpus.entries[1].split, corpus.entries[0].split);

  const auto dir = std::filesystem::temp_directory_path() / "evtraj_test_corpus";
  std::filesystem::remove_all(dir);
  write_corpus(dir, tracks, splits, 5, SplitRatios{}, false);
  const auto m = load_manifest(dir / "manifest.json");
  ASSERT_EQ(m.entries.size(), 6u);
  EXPECT_EQ(m.seed, 5u);
  const auto loaded = load_corpus_tracks(dir / "manifest.json", m);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(m.entries[i].split, splits[i]);
    ASSERT_EQ(loaded[i].points.size(), tracks[i].points.size());
    EXPECT_EQ(loaded[i].points[7].t_us, tracks[i].points[7].t_us);
    EXPECT_EQ(loaded[i].points[7].x, tracks[i].points[7].x);
    EXPECT_EQ(loaded[i].points.back().y, tracks[i].points.back().y);
  }
}

TEST(Corpus, MalformedManifest) {
  const auto p = std::filesystem::temp_directory_path() / "evtraj_bad_manifest.json";
  {
    std::ofstream out(p);
    out << "{\"format\": \"something-else\"}";
  }
  EXPECT_THROW(load_manifest(p), FormatError);
  EXPECT_THROW(load_manifest(p.string() + ".missing"), IoError);
}
