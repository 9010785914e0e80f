#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evtraj/event_sim.hpp"
#include "evtraj/sampling.hpp"
#include "evtraj/seq2seq.hpp"
#include "evtraj/tracker.hpp"

namespace evtraj {

enum class Split { Train, Validation, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// Mirror about the vertical centre line: x' = (width - 1) - x. Exactly
/// self-inverse for coordinates on the f32 grid (all stored tracks).
SampledSequence flip_augment(const SampledSequence& sequence, int sensor_width = kSensorWidth);

struct CorpusEntry {
  SampledSequence sequence;
  std::size_t source_id = 0;
  bool flipped = false;
  Split split = Split::Train;
  std::string provenance;  // "synthetic:seed=<n>" or "file:<path>"
};

struct TrajectoryCorpus {
  std::vector<CorpusEntry> entries;

  std::size_t count(Split split) const;
  std::vector<const CorpusEntry*> in_split(Split split) const;
};

/// Relative split sizes; default mirrors 470 / 20 / 10.
struct SplitRatios {
  double train = 470.0;
  double validation = 20.0;
  double test = 10.0;
};

/// Split labels for `n_sources` source trajectories: seeded shuffle, then
/// proportional assignment with at least one source per split.
std::vector<Split> assign_source_splits(std::size_t n_sources, const SplitRatios& ratios,
                                        std::uint64_t seed);

/// Relabels a corpus at source level, so flipped and original variants
/// always share a split. Throws when fewer than 3 sources exist.
TrajectoryCorpus make_splits(TrajectoryCorpus corpus, const SplitRatios& ratios, std::uint64_t seed);

/// (X px, Y px, dT ms) triple; dT is the gap to the previous sample.
struct Triple {
  double x = 0.0;
  double y = 0.0;
  double dt_ms = 0.0;
};

struct WindowPair {
  std::vector<Triple> input;
  std::vector<Triple> target;
  std::size_t source_id = 0;
  std::size_t offset = 0;  // index of the first input point
};

/// All windows of w_in + w_out consecutive points at the given stride; a
/// window's first dT is measured from the preceding sample (0 at the start).
std::vector<WindowPair> make_windows(const SampledSequence& sequence, std::size_t w_in,
                                     std::size_t w_out, std::size_t stride = 1,
                                     std::size_t source_id = 0);

WindowTensors to_tensors(std::span<const WindowPair> windows, const NormalizationSpec& norm);

// ---------------------------------------------------------------------------
// Synthetic trajectory collection.

/// Ranges for the random launch of each simulated throw.
struct LaunchRanges {
  double start_y_min = 30.0, start_y_max = 110.0;      // px
  double speed_x_min = 180.0, speed_x_max = 420.0;     // px/s
  double speed_y_min = -150.0, speed_y_max = 150.0;    // px/s
  double restitution_min = 0.65, restitution_max = 0.85;
};

struct CorpusSpec {
  std::size_t count = 250;
  std::uint64_t seed = 0;
  SimConfig sim;            // restitution and seed are drawn per source
  LaunchRanges launch;
  double sim_dt = 0.0005;   // s
  double max_duration = 1.6;  // s
  double roi_size = 40.0;
  std::size_t accum_threshold = kDefaultAccumThreshold;
};

/// One source trajectory: tracker output (rounded to f32 precision, as
/// stored in track files) plus the simulator ground truth.
struct RawTrack {
  std::size_t source_id = 0;
  std::uint64_t seed = 0;
  std::vector<TrackPoint> points;
  std::vector<BallState> truth;
};

/// Ground truth and rendered events of throw `index`, before tracking.
struct SourceEvents {
  std::uint64_t seed = 0;  // simulator seed
  std::vector<BallState> truth;
  std::vector<Event> events;
};

SourceEvents simulate_source_events(const CorpusSpec& spec, std::size_t index);

/// Simulates throw `index`: launch from the left edge, bounce until the ball
/// leaves the frame or max_duration elapses, render events, track them.
RawTrack simulate_source(const CorpusSpec& spec, std::size_t index);

std::vector<RawTrack> generate_raw_tracks(const CorpusSpec& spec);

/// Samples every raw track, adds flipped copies and labels splits per source.
TrajectoryCorpus build_corpus(std::span<const RawTrack> tracks, const SamplingStrategy& strategy,
                              std::span<const Split> source_splits);

// ---------------------------------------------------------------------------
// Corpus manifest: JSON listing trajectory files, split labels and seeds.

struct ManifestEntry {
  std::size_t source_id = 0;
  std::filesystem::path file;  // relative to the manifest's directory
  Split split = Split::Train;
  std::uint64_t seed = 0;
};

struct CorpusManifest {
  std::uint64_t seed = 0;
  std::string augment = "flip_x";
  SplitRatios ratios;
  std::vector<ManifestEntry> entries;
};

/// Writes each raw track as TRK1 (or CSV) plus `manifest.json` into `dir`.
CorpusManifest write_corpus(const std::filesystem::path& dir, std::span<const RawTrack> tracks,
                            std::span<const Split> splits, std::uint64_t seed,
                            const SplitRatios& ratios, bool csv = false);

void save_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);
CorpusManifest load_manifest(const std::filesystem::path& path);

/// Loads the tracks a manifest lists (ground truth is not stored on disk).
std::vector<RawTrack> load_corpus_tracks(const std::filesystem::path& manifest_path,
                                         const CorpusManifest& manifest);

}  // namespace evtraj
