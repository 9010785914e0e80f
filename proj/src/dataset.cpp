#include "evtraj/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "evtraj/error.hpp"
#include "evtraj/io.hpp"
#include "evtraj/seed.hpp"
#include "evtraj/tracker.hpp"

namespace evtraj {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Validation:
      return "validation";
    case Split::Test:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "validation") return Split::Validation;
  if (text == "test") return Split::Test;
  throw FormatError("unknown split label '" + std::string(text) + "'");
}

SampledSequence flip_augment(const SampledSequence& sequence, int sensor_width) {
  SampledSequence out = sequence;
  const double mirror = static_cast<double>(sensor_width - 1);
  for (auto& p : out.points) p.x = mirror - p.x;
  return out;
}

std::size_t TrajectoryCorpus::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [split](const CorpusEntry& e) { return e.split == split; }));
}

std::vector<const CorpusEntry*> TrajectoryCorpus::in_split(Split split) const {
  std::vector<const CorpusEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

std::vector<Split> assign_source_splits(std::size_t n_sources, const SplitRatios& ratios,
                                        std::uint64_t seed) {
  if (n_sources < 3) throw InvalidArgument("need at least 3 source trajectories to split");
  const double total = ratios.train + ratios.validation + ratios.test;
  if (!(ratios.train > 0.0 && ratios.validation > 0.0 && ratios.test > 0.0) ||
      !std::isfinite(total)) {
    throw InvalidArgument("split ratios must be positive");
  }
  const double n = static_cast<double>(n_sources);
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * ratios.validation / total)));
  const auto n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * ratios.test / total)));
  if (n_val + n_test >= n_sources) throw InvalidArgument("too few source trajectories for a training split");

  std::vector<std::size_t> order(n_sources);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Split> splits(n_sources, Split::Train);
  for (std::size_t k = 0; k < n_val; ++k) splits[order[k]] = Split::Validation;
  for (std::size_t k = n_val; k < n_val + n_test; ++k) splits[order[k]] = Split::Test;
  return splits;
}

TrajectoryCorpus make_splits(TrajectoryCorpus corpus, const SplitRatios& ratios, std::uint64_t seed) {
  std::set<std::size_t> ids;
  for (const auto& e : corpus.entries) ids.insert(e.source_id);
  const std::vector<std::size_t> sources(ids.begin(), ids.end());
  const auto labels = assign_source_splits(sources.size(), ratios, seed);
  std::map<std::size_t, Split> by_source;
  for (std::size_t k = 0; k < sources.size(); ++k) by_source[sources[k]] = labels[k];
  for (auto& e : corpus.entries) e.split = by_source.at(e.source_id);
  return corpus;
}

std::vector<WindowPair> make_windows(const SampledSequence& sequence, std::size_t w_in,
                                     std::size_t w_out, std::size_t stride, std::size_t source_id) {
  if (w_in < 1 || w_out < 1) throw InvalidArgument("w_in and w_out must be at least 1");
  if (stride < 1) throw InvalidArgument("stride must be at least 1");
  const auto& pts = sequence.points;
  const std::size_t span = w_in + w_out;
  std::vector<WindowPair> windows;
  if (pts.size() < span) return windows;

  auto triple = [&](std::size_t i) {
    const double dt = i == 0 ? 0.0 : static_cast<double>(pts[i].t_us - pts[i - 1].t_us) / 1000.0;
    return Triple{pts[i].x, pts[i].y, dt};
  };
  for (std::size_t offset = 0; offset + span <= pts.size(); offset += stride) {
    WindowPair w;
    w.source_id = source_id;
    w.offset = offset;
    w.input.reserve(w_in);
    w.target.reserve(w_out);
    for (std::size_t k = 0; k < w_in; ++k) w.input.push_back(triple(offset + k));
    for (std::size_t k = 0; k < w_out; ++k) w.target.push_back(triple(offset + w_in + k));
    windows.push_back(std::move(w));
  }
  return windows;
}

WindowTensors to_tensors(std::span<const WindowPair> windows, const NormalizationSpec& norm) {
  norm.validate();
  auto pack = [&](const std::vector<Triple>& triples) {
    Matrix3Xd m(kFeatureSize, static_cast<Index>(triples.size()));
    for (std::size_t k = 0; k < triples.size(); ++k) {
      m.col(static_cast<Index>(k)) << triples[k].x * norm.x_scale, triples[k].y * norm.y_scale,
          triples[k].dt_ms * norm.dt_scale;
    }
    return m;
  };
  WindowTensors out;
  out.inputs.reserve(windows.size());
  out.targets.reserve(windows.size());
  for (const auto& w : windows) {
    out.inputs.push_back(pack(w.input));
    out.targets.push_back(pack(w.target));
  }
  return out;
}

SourceEvents simulate_source_events(const CorpusSpec& spec, std::size_t index) {
  std::mt19937_64 launch(derive_seed(spec.seed, seed_stream::kLaunch, index));
  auto draw = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(launch);
  };
  const auto& l = spec.launch;

  SimConfig sim = spec.sim;
  sim.seed = derive_seed(spec.seed, seed_stream::kSimulator, index);
  BallState initial;
  initial.position = {sim.ball_radius + 1.0, draw(l.start_y_min, l.start_y_max)};
  initial.velocity = {draw(l.speed_x_min, l.speed_x_max), draw(l.speed_y_min, l.speed_y_max)};
  sim.restitution = draw(l.restitution_min, l.restitution_max);

  auto states = simulate_trajectory(sim, initial, spec.max_duration, spec.sim_dt);
  // Keep the throw while the whole disc is inside the frame.
  const auto exit = std::find_if(states.begin(), states.end(), [&](const BallState& s) {
    return s.position.x + sim.ball_radius >= kSensorWidth - 1 || s.position.x - sim.ball_radius < 0.0;
  });
  states.erase(exit, states.end());
  if (states.size() < 2) throw InvalidArgument("simulated throw leaves the frame immediately");

  SourceEvents out;
  out.seed = sim.seed;
  out.events = generate_events(states, sim);
  out.truth = std::move(states);
  return out;
}

RawTrack simulate_source(const CorpusSpec& spec, std::size_t index) {
  auto sim = simulate_source_events(spec, index);
  RawTrack track;
  track.source_id = index;
  track.seed = sim.seed;
  track.points = track_stream(sim.events, spec.roi_size, spec.accum_threshold);
  // Round to the f32 grid that track files store, so in-memory and on-disk
  // corpora agree bit for bit and mirroring stays exactly invertible.
  round_to_track_precision(track.points);
  track.truth = std::move(sim.truth);
  return track;
}

std::vector<RawTrack> generate_raw_tracks(const CorpusSpec& spec) {
  if (spec.count < 1) throw InvalidArgument("corpus count must be at least 1");
  std::vector<RawTrack> tracks;
  tracks.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) tracks.push_back(simulate_source(spec, i));
  return tracks;
}

TrajectoryCorpus build_corpus(std::span<const RawTrack> tracks, const SamplingStrategy& strategy,
                              std::span<const Split> source_splits) {
  if (tracks.size() != source_splits.size()) {
    throw InvalidArgument("one split label per source trajectory required");
  }
  TrajectoryCorpus corpus;
  corpus.entries.reserve(2 * tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    CorpusEntry original;
    original.sequence = subsample(tracks[i].points, strategy);
    original.source_id = tracks[i].source_id;
    original.split = source_splits[i];
    original.provenance = "synthetic:seed=" + std::to_string(tracks[i].seed);
    CorpusEntry mirrored = original;
    mirrored.sequence = flip_augment(original.sequence);
    mirrored.flipped = true;
    corpus.entries.push_back(std::move(original));
    corpus.entries.push_back(std::move(mirrored));
  }
  return corpus;
}

namespace {

using nlohmann::json;

json manifest_json(const CorpusManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"source_id", e.source_id},
                       {"file", e.file.generic_string()},
                       {"split", to_string(e.split)},
                       {"seed", e.seed}});
  }
  return json{{"format", "evtraj-corpus-1"},
              {"seed", m.seed},
              {"augment", m.augment},
              {"split_ratios", {m.ratios.train, m.ratios.validation, m.ratios.test}},
              {"trajectories", entries}};
}

}  // namespace

void save_manifest(const std::filesystem::path& path, const CorpusManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << manifest_json(manifest).dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  CorpusManifest m;
  try {
    const json j = json::parse(in);
    if (j.at("format") != "evtraj-corpus-1") throw FormatError("unsupported manifest format");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.augment = j.at("augment").get<std::string>();
    const auto& r = j.at("split_ratios");
    m.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    for (const auto& e : j.at("trajectories")) {
      m.entries.push_back({e.at("source_id").get<std::size_t>(), e.at("file").get<std::string>(),
                           parse_split(e.at("split").get<std::string>()),
                           e.at("seed").get<std::uint64_t>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

CorpusManifest write_corpus(const std::filesystem::path& dir, std::span<const RawTrack> tracks,
                            std::span<const Split> splits, std::uint64_t seed,
                            const SplitRatios& ratios, bool csv) {
  if (tracks.size() != splits.size()) throw InvalidArgument("one split label per track required");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  CorpusManifest m;
  m.seed = seed;
  m.ratios = ratios;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "track_%04zu.%s", tracks[i].source_id, csv ? "csv" : "trk");
    save_track(dir / name, tracks[i].points, csv ? FileFormat::Csv : FileFormat::Binary);
    m.entries.push_back({tracks[i].source_id, name, splits[i], tracks[i].seed});
  }
  save_manifest(dir / "manifest.json", m);
  return m;
}

std::vector<RawTrack> load_corpus_tracks(const std::filesystem::path& manifest_path,
                                         const CorpusManifest& manifest) {
  const auto base = manifest_path.parent_path();
  std::vector<RawTrack> tracks;
  tracks.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    RawTrack t;
    t.source_id = e.source_id;
    t.seed = e.seed;
    t.points = load_track(base / e.file);
    tracks.push_back(std::move(t));
  }
  return tracks;
}

}  // namespace evtraj
