// evtraj: simulate -> track -> sample -> dataset -> train -> eval/sweep.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evtraj/checkpoint.hpp"
#include "evtraj/dataset.hpp"
#include "evtraj/error.hpp"
#include "evtraj/eval.hpp"
#include "evtraj/io.hpp"
#include "evtraj/sampling.hpp"
#include "evtraj/seed.hpp"
#include "evtraj/tracker.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace evtraj;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kFormat = 4,
  kInvalid = 5,
  kNumeric = 6,
  kVerify = 7,
};

struct VerifyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir;
};

// FNV-1a over the canonical (sorted-key) JSON dump.
std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Relative output paths land in --out-dir (or $EVTRAJ_OUT_DIR).
fs::path output_path(const Globals& g, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || g.out_dir.empty()) return p;
  return fs::path(g.out_dir) / p;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_run_manifest(const fs::path& where, const std::string& command, json config,
                        const json& results) {
  json doc{{"tool", "evtraj"},
           {"command", command},
           {"config", config},
           {"config_hash", config_hash(config)},
           {"results", results}};
  std::ofstream out(where);
  if (!out) throw IoError("cannot write " + where.string());
  out << doc.dump(2) << '\n';
}

fs::path manifest_for(const fs::path& artifact) { return fs::path(artifact.string() + ".run.json"); }

FileFormat pick_format(const std::string& flag, const fs::path& path) {
  if (flag == "csv") return FileFormat::Csv;
  if (flag == "binary") return FileFormat::Binary;
  return format_for_path(path);
}

std::string default_name(const std::string& stem, const std::string& format, const char* binary_ext) {
  return stem + (format == "csv" ? ".csv" : binary_ext);
}

struct StrategyFlags {
  std::string kind = "spatial";
  double delta_px = 2.0;
  double period_ms = 10.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--strategy", kind, "Sub-sampling strategy")
        ->check(CLI::IsMember({"fixed", "spatial"}))
        ->capture_default_str();
    cmd->add_option("--delta-px", delta_px, "Spatial threshold D in pixels")->capture_default_str();
    cmd->add_option("--period-ms", period_ms, "Fixed-rate period F in milliseconds")->capture_default_str();
  }
  SamplingStrategy get() const {
    SamplingStrategy s = kind == "fixed" ? SamplingStrategy{FixedRate{period_ms}} : SamplingStrategy{Spatial{delta_px}};
    validate(s);
    return s;
  }
};

// Inverse of describe(): "spatial:2px" or "fixed:10ms".
SamplingStrategy parse_strategy_label(const std::string& label) {
  const auto colon = label.find(':');
  if (colon == std::string::npos) throw FormatError("bad strategy label '" + label + "'");
  const auto kind = label.substr(0, colon);
  std::string value = label.substr(colon + 1);
  const std::string unit = kind == "spatial" ? "px" : "ms";
  if ((kind != "spatial" && kind != "fixed") || value.size() <= unit.size() ||
      value.compare(value.size() - unit.size(), unit.size(), unit) != 0) {
    throw FormatError("bad strategy label '" + label + "'");
  }
  value.resize(value.size() - unit.size());
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::exception&) {
    throw FormatError("bad strategy label '" + label + "'");
  }
  SamplingStrategy s = kind == "spatial" ? SamplingStrategy{Spatial{v}} : SamplingStrategy{FixedRate{v}};
  validate(s);
  return s;
}

struct Corpus {
  std::vector<RawTrack> tracks;
  std::vector<Split> splits;
};

Corpus load_manifest_corpus(const fs::path& manifest_path) {
  const auto manifest = load_manifest(manifest_path);
  Corpus c;
  c.tracks = load_corpus_tracks(manifest_path, manifest);
  for (const auto& e : manifest.entries) c.splits.push_back(e.split);
  return c;
}

SplitRatios parse_ratios(const std::vector<double>& r) {
  if (r.size() != 3) throw InvalidArgument("--ratios takes three values: train,validation,test");
  return SplitRatios{r[0], r[1], r[2]};
}

json error_json(const ErrorDecomposition& e) {
  return {{"spatial_rmse_px", e.spatial_rmse_px}, {"temporal_rmse_ms", e.temporal_rmse_ms}, {"n_points", e.n_points}};
}

json sweep_json(const SweepResult& s) {
  json points = json::array();
  for (const auto& p : s.points) {
    json j{{"axis_value", p.axis_value},
           {"w_in", p.w_in},
           {"w_out", p.w_out},
           {"n_test_windows", p.n_test_windows},
           {"error", error_json(p.error)}};
    if (p.mean_rate_hz) j["mean_rate_hz"] = *p.mean_rate_hz;
    points.push_back(j);
  }
  return {{"axis", std::string(to_string(s.axis))}, {"points", points}};
}

void write_csv_file(const fs::path& path, std::span<const SweepResult> sweeps) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_results_csv(out, sweeps);
}

struct TrainFlags {
  int epochs = 200;
  std::size_t batch_size = 128;
  double learning_rate = 0.01;
  Index hidden = kDefaultHidden;
  std::size_t stride = 1;
  std::size_t eval_stride = 1;
  bool restore_best = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--epochs", epochs)->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--batch-size", batch_size)->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--lr", learning_rate, "Adam learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--hidden", hidden, "LSTM hidden size")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--stride", stride, "Window stride for training and validation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--eval-stride", eval_stride, "Window stride for the test set")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--restore-best", restore_best, "Keep the weights of the best validation epoch");
  }
  ExperimentConfig get(std::uint64_t seed) const {
    ExperimentConfig c;
    c.train.epochs = epochs;
    c.train.batch_size = batch_size;
    c.train.adam.learning_rate = learning_rate;
    c.train.seed = seed;
    c.train.restore_best = restore_best;
    c.hidden_size = hidden;
    c.train_stride = stride;
    c.eval_stride = eval_stride;
    return c;
  }
  json to_json() const {
    return {{"epochs", epochs},  {"batch_size", batch_size},   {"lr", learning_rate},  {"hidden", hidden},
            {"stride", stride}, {"eval_stride", eval_stride}, {"restore_best", restore_best}};
  }
};

// ---------------------------------------------------------------------------

int cmd_simulate(const Globals& g, std::size_t index, double noise_rate, const std::string& output,
                 const std::string& format, const std::string& truth_out) {
  CorpusSpec spec;
  spec.seed = g.seed;
  spec.sim.noise_rate = noise_rate;
  const auto sim = simulate_source_events(spec, index);
  const auto path = output_path(g, output);
  ensure_parent(path);
  save_events(path, sim.events, pick_format(format, path));
  json results{{"events", sim.events.size()}, {"simulator_seed", sim.seed}};
  if (!truth_out.empty()) {
    std::vector<TrackPoint> truth;
    for (const auto& s : sim.truth) {
      truth.push_back({s.position.x, s.position.y, std::llround(s.time * 1e6)});
    }
    const auto tpath = output_path(g, truth_out);
    ensure_parent(tpath);
    save_track(tpath, truth, pick_format(format, tpath));
    results["truth"] = tpath.generic_string();
  }
  write_run_manifest(manifest_for(path), "simulate",
                     {{"seed", g.seed}, {"index", index}, {"noise_rate", noise_rate}}, results);
  std::cout << sim.events.size() << " events -> " << path.string() << '\n';
  return kOk;
}

int cmd_track(const Globals& g, const std::string& input, const std::string& output, const std::string& format,
              double roi_size, std::size_t threshold) {
  const auto events = load_events(input);
  auto points = track_stream(events, roi_size, threshold);
  // Same f32 grid in CSV and TRK1, as in corpus files.
  round_to_track_precision(points);
  const auto path = output_path(g, output);
  ensure_parent(path);
  save_track(path, points, pick_format(format, path));
  write_run_manifest(manifest_for(path), "track",
                     {{"input", input}, {"roi_size", roi_size}, {"accum_threshold", threshold}},
                     {{"events", events.size()}, {"points", points.size()}});
  std::cout << points.size() << " track points -> " << path.string() << '\n';
  return kOk;
}

int cmd_sample(const Globals& g, const std::string& input, const std::string& output, const std::string& format,
               const StrategyFlags& flags) {
  const auto strategy = flags.get();
  const auto track = load_track(input);
  const auto sampled = subsample(track, strategy);
  const auto path = output_path(g, output);
  ensure_parent(path);
  save_track(path, sampled.points, pick_format(format, path));
  json results{{"input_points", track.size()}, {"points", sampled.points.size()}};
  if (sampled.points.size() >= 2) {
    const auto r = mean_rate(sampled);
    results["mean_rate_hz"] = r.mean_hz;
    results["std_rate_hz"] = r.std_hz;
  }
  write_run_manifest(manifest_for(path), "sample", {{"input", input}, {"strategy", describe(strategy)}}, results);
  std::cout << sampled.points.size() << " of " << track.size() << " points (" << describe(strategy) << ") -> "
            << path.string() << '\n';
  return kOk;
}

// Checks a sampled track against its strategy's invariant; with --source also
// checks that every skipped source point was below the threshold.
int cmd_verify(const std::string& input, const std::string& source, const StrategyFlags& flags) {
  const auto strategy = flags.get();
  const auto pts = load_track(input);
  const bool spatial = std::holds_alternative<Spatial>(strategy);
  const double limit = spatial ? std::get<Spatial>(strategy).delta_px : std::get<FixedRate>(strategy).period_ms;
  auto gap = [&](const TrackPoint& a, const TrackPoint& b) {
    return spatial ? std::hypot(b.x - a.x, b.y - a.y) : static_cast<double>(b.t_us - a.t_us) / 1000.0;
  };
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].t_us <= pts[i - 1].t_us) {
      throw VerifyFailure("point " + std::to_string(i) + ": timestamp not strictly increasing");
    }
    if (gap(pts[i - 1], pts[i]) < limit) {
      throw VerifyFailure("point " + std::to_string(i) + ": gap " + format_double(gap(pts[i - 1], pts[i])) +
                          " below " + describe(strategy));
    }
  }
  if (!source.empty()) {
    auto expected = subsample(load_track(source), strategy).points;
    if (format_for_path(input) == FileFormat::Binary) round_to_track_precision(expected);
    if (expected != pts) throw VerifyFailure("not the " + describe(strategy) + " sub-sampling of " + source);
  }
  std::cout << "ok: " << pts.size() << " points satisfy " << describe(strategy) << '\n';
  return kOk;
}

struct DatasetFlags {
  std::size_t count = 250;
  std::string out = "corpus";
  double noise_rate = 0.0;
  double roi_size = kDefaultRoiSize;
  std::size_t threshold = kDefaultAccumThreshold;
  std::vector<double> ratios{470.0, 20.0, 10.0};
};

int cmd_dataset_build(const Globals& g, const DatasetFlags& f, const std::string& format) {
  CorpusSpec spec;
  spec.count = f.count;
  spec.seed = g.seed;
  spec.sim.noise_rate = f.noise_rate;
  spec.roi_size = f.roi_size;
  spec.accum_threshold = f.threshold;
  const auto ratios = parse_ratios(f.ratios);
  const auto tracks = generate_raw_tracks(spec);
  const auto splits = assign_source_splits(tracks.size(), ratios, derive_seed(g.seed, seed_stream::kSplits));
  const auto dir = output_path(g, f.out);
  fs::create_directories(dir);
  const auto manifest = write_corpus(dir, tracks, splits, g.seed, ratios, format == "csv");
  std::size_t n[3] = {0, 0, 0};
  for (const auto s : splits) ++n[static_cast<int>(s)];
  write_run_manifest(dir / "run.json", "dataset build",
                     {{"seed", g.seed},
                      {"count", f.count},
                      {"noise_rate", f.noise_rate},
                      {"roi_size", f.roi_size},
                      {"accum_threshold", f.threshold},
                      {"ratios", f.ratios},
                      {"format", format.empty() ? "binary" : format}},
                     {{"sources", tracks.size()}, {"train", n[0]}, {"validation", n[1]}, {"test", n[2]}});
  std::cout << manifest.entries.size() << " sources (" << n[0] << "/" << n[1] << "/" << n[2] << ") -> "
            << (dir / "manifest.json").string() << '\n';
  return kOk;
}

int cmd_train(const Globals& g, const std::string& manifest, const StrategyFlags& sflags, const TrainFlags& tflags,
              Index w_in, Index w_out, const std::string& output) {
  const auto strategy = sflags.get();
  const auto corpus = load_manifest_corpus(manifest);
  const auto config = tflags.get(g.seed);
  const auto result = run_condition(corpus.tracks, corpus.splits, strategy, w_in, w_out, config);
  const auto path = output_path(g, output);
  ensure_parent(path);
  CheckpointMeta meta;
  meta.train = config.train;
  meta.w_in = w_in;
  meta.w_out = w_out;
  meta.strategy = describe(strategy);
  meta.seed = g.seed;
  save_model(path, result.model, meta);

  const auto curve_path = fs::path(path.string() + ".curve.csv");
  std::ofstream curve(curve_path);
  if (!curve) throw IoError("cannot write " + curve_path.string());
  curve << "epoch,train_loss,validation_loss,validation_spatial_rmse_px\n";
  for (const auto& e : result.training.curve) {
    curve << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.validation_loss) << ','
          << format_double(e.validation_spatial_rmse_px) << '\n';
  }
  json cfg = tflags.to_json();
  cfg["seed"] = g.seed;
  cfg["manifest"] = manifest;
  cfg["strategy"] = describe(strategy);
  cfg["w_in"] = w_in;
  cfg["w_out"] = w_out;
  write_run_manifest(manifest_for(path), "train", cfg,
                     {{"best_epoch", result.training.best_epoch},
                      {"test", error_json(result.test_error)},
                      {"n_test_windows", result.n_test_windows},
                      {"mean_rate_hz", result.mean_rate_hz}});
  std::cout << "test spatial RMSE " << format_double(result.test_error.spatial_rmse_px) << " px, temporal RMSE "
            << format_double(result.test_error.temporal_rmse_ms) << " ms -> " << path.string() << '\n';
  return kOk;
}

int cmd_eval(const Globals& g, const std::string& manifest, const std::string& model_path, std::size_t eval_stride,
             const std::string& output) {
  const auto loaded = load_model(model_path);
  const auto strategy = parse_strategy_label(loaded.meta.strategy);
  const auto corpus = load_manifest_corpus(manifest);
  const auto built = build_corpus(corpus.tracks, strategy, corpus.splits);
  const auto r = evaluate_model(loaded.model, built, loaded.meta.w_in, loaded.meta.w_out, eval_stride);
  SweepPoint p;
  p.axis_value = static_cast<double>(loaded.meta.w_out);
  p.error = r.test_error;
  p.mean_rate_hz = r.mean_rate_hz;
  p.n_test_windows = r.n_test_windows;
  p.w_in = loaded.meta.w_in;
  p.w_out = loaded.meta.w_out;
  const std::vector<SweepResult> sweeps{{SweepAxis::WOut, {p}}};
  const auto path = output_path(g, output);
  write_csv_file(path, sweeps);
  write_run_manifest(manifest_for(path), "eval",
                     {{"manifest", manifest},
                      {"model", model_path},
                      {"eval_stride", eval_stride},
                      {"strategy", loaded.meta.strategy},
                      {"model_seed", loaded.meta.seed}},
                     sweep_json(sweeps[0]));
  std::cout << "test spatial RMSE " << format_double(r.test_error.spatial_rmse_px) << " px over "
            << r.n_test_windows << " windows -> " << path.string() << '\n';
  return kOk;
}

struct SweepFlags {
  std::string axis;
  std::vector<double> values;
  std::string manifest;
  std::size_t count = 250;
  Index w_in = 20;
  Index w_out = 45;
  double input_span_ms = 90.0;
  double output_span_ms = 200.0;
  std::string output = "results.csv";
};

std::vector<Index> integer_values(const std::vector<double>& values) {
  std::vector<Index> out;
  for (const double v : values) {
    if (v < 1 || v != std::floor(v)) throw InvalidArgument("window lengths must be positive integers");
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

int cmd_sweep(const Globals& g, const SweepFlags& f, const StrategyFlags& sflags, const TrainFlags& tflags) {
  Corpus corpus;
  if (!f.manifest.empty()) {
    corpus = load_manifest_corpus(f.manifest);
  } else {
    CorpusSpec spec;
    spec.count = f.count;
    spec.seed = g.seed;
    corpus.tracks = generate_raw_tracks(spec);
    corpus.splits = assign_source_splits(corpus.tracks.size(), SplitRatios{}, derive_seed(g.seed, seed_stream::kSplits));
  }
  const auto config = tflags.get(g.seed);
  json cfg = tflags.to_json();
  cfg["seed"] = g.seed;
  cfg["axis"] = f.axis;
  cfg["values"] = f.values;
  cfg["corpus"] = f.manifest.empty() ? json{{"synthetic_count", f.count}} : json{{"manifest", f.manifest}};

  std::vector<SweepResult> sweeps;
  json results;
  if (f.axis == "wout" || f.axis == "win") {
    const auto strategy = sflags.get();
    const auto lengths = integer_values(f.values);
    cfg["strategy"] = describe(strategy);
    if (f.axis == "wout") {
      cfg["w_in"] = f.w_in;
      sweeps.push_back(sweep_wout(corpus.tracks, corpus.splits, strategy, f.w_in, lengths, config));
    } else {
      cfg["w_out"] = f.w_out;
      sweeps.push_back(sweep_win(corpus.tracks, corpus.splits, strategy, f.w_out, lengths, config));
    }
    results = sweep_json(sweeps[0]);
  } else {
    cfg["input_span_ms"] = f.input_span_ms;
    cfg["output_span_ms"] = f.output_span_ms;
    const auto cmp =
        compare_strategies(corpus.tracks, corpus.splits, f.values, config, f.input_span_ms, f.output_span_ms);
    sweeps = {cmp.spatial, cmp.fixed_rate};
    json matched = json::array();
    for (const auto& m : cmp.matched) {
      matched.push_back({{"delta_px", m.delta_px}, {"mean_rate_hz", m.mean_rate_hz}, {"period_ms", m.period_ms}});
    }
    results = {{"spatial", sweep_json(cmp.spatial)}, {"fixed_rate", sweep_json(cmp.fixed_rate)}, {"matched", matched}};
  }
  cfg["split_seed"] = derive_seed(g.seed, seed_stream::kSplits);
  const auto path = output_path(g, f.output);
  write_csv_file(path, sweeps);
  write_run_manifest(manifest_for(path), "sweep", cfg, results);
  std::cout << "sweep " << f.axis << " (" << f.values.size() << " values) -> " << path.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-camera trajectory prediction pipeline"};
  app.require_subcommand(1);
  Globals g;
  if (const char* env = std::getenv("EVTRAJ_OUT_DIR")) g.out_dir = env;
  app.add_option("--seed", g.seed, "Global seed; every random stream derives from it")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for relative output paths (default $EVTRAJ_OUT_DIR)");

  std::string format;
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format (default: from the file extension)")
        ->check(CLI::IsMember({"csv", "binary"}));
  };

  std::function<int()> run;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Render one synthetic throw as an event stream");
  std::size_t sim_index = 0;
  double sim_noise = 0.0;
  std::string sim_out, sim_truth;
  sim->add_option("--index", sim_index, "Throw index within the seeded corpus")->capture_default_str();
  sim->add_option("--noise-rate", sim_noise, "Background events per second")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sim->add_option("-o,--output", sim_out, "Event file (EVT1 or CSV)");
  sim->add_option("--truth", sim_truth, "Also write the true ball centres as a track");
  add_format(sim);
  sim->callback([&] {
    run = [&] {
      return cmd_simulate(g, sim_index, sim_noise, sim_out.empty() ? default_name("events", format, ".evt1") : sim_out,
                          format, sim_truth);
    };
  });

  // track
  auto* trk = app.add_subcommand("track", "Run the ROI mean tracker over an event file");
  std::string trk_in, trk_out;
  double roi_size = kDefaultRoiSize;
  std::size_t threshold = kDefaultAccumThreshold;
  trk->add_option("-i,--input", trk_in, "Event file")->required()->check(CLI::ExistingFile);
  trk->add_option("-o,--output", trk_out, "Track file (TRK1 or CSV)");
  trk->add_option("--roi-size", roi_size, "ROI side length in pixels")->check(CLI::PositiveNumber)->capture_default_str();
  trk->add_option("--accum-threshold", threshold, "In-ROI events per centre update")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_format(trk);
  trk->callback([&] {
    run = [&] {
      return cmd_track(g, trk_in, trk_out.empty() ? default_name("track", format, ".trk") : trk_out, format, roi_size,
                       threshold);
    };
  });

  // sample
  auto* smp = app.add_subcommand("sample", "Sub-sample a track by fixed rate or spatial distance");
  std::string smp_in, smp_out;
  StrategyFlags smp_strategy;
  smp->add_option("-i,--input", smp_in, "Track file")->required()->check(CLI::ExistingFile);
  smp->add_option("-o,--output", smp_out, "Sampled track file");
  smp_strategy.add(smp);
  add_format(smp);
  smp->callback([&] {
    run = [&] {
      return cmd_sample(g, smp_in, smp_out.empty() ? default_name("sampled", format, ".trk") : smp_out, format,
                        smp_strategy);
    };
  });

  // verify
  auto* ver = app.add_subcommand("verify", "Check a sampled track against its strategy's invariant");
  std::string ver_in, ver_src;
  StrategyFlags ver_strategy;
  ver->add_option("-i,--input", ver_in, "Sampled track file")->required()->check(CLI::ExistingFile);
  ver->add_option("--source", ver_src, "Unsampled track it was produced from")->check(CLI::ExistingFile);
  ver_strategy.add(ver);
  ver->callback([&] { run = [&] { return cmd_verify(ver_in, ver_src, ver_strategy); }; });

  // dataset build
  auto* ds = app.add_subcommand("dataset", "Trajectory corpus commands");
  ds->require_subcommand(1);
  auto* build = ds->add_subcommand("build", "Simulate and track a corpus, assign splits, write a manifest");
  DatasetFlags dsf;
  build->add_option("--count", dsf.count, "Source throws")->check(CLI::PositiveNumber)->capture_default_str();
  build->add_option("-o,--output", dsf.out, "Corpus directory")->capture_default_str();
  build->add_option("--noise-rate", dsf.noise_rate, "Background events per second")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  build->add_option("--roi-size", dsf.roi_size)->check(CLI::PositiveNumber)->capture_default_str();
  build->add_option("--accum-threshold", dsf.threshold)->check(CLI::PositiveNumber)->capture_default_str();
  build->add_option("--ratios", dsf.ratios, "train,validation,test")->delimiter(',')->expected(3);
  add_format(build);
  build->callback([&] { run = [&] { return cmd_dataset_build(g, dsf, format); }; });

  // train
  auto* tr = app.add_subcommand("train", "Train one encoder-decoder on a corpus");
  std::string tr_manifest, tr_out = "model.s2s";
  StrategyFlags tr_strategy;
  TrainFlags tr_flags;
  Index tr_win = 20, tr_wout = 45;
  tr->add_option("--manifest", tr_manifest, "Corpus manifest.json")->required()->check(CLI::ExistingFile);
  tr->add_option("-o,--output", tr_out, "Checkpoint path (a .json sidecar is written next to it)")
      ->capture_default_str();
  tr->add_option("--w-in", tr_win)->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--w-out", tr_wout)->check(CLI::PositiveNumber)->capture_default_str();
  tr_strategy.add(tr);
  tr_flags.add(tr);
  tr->callback([&] {
    run = [&] { return cmd_train(g, tr_manifest, tr_strategy, tr_flags, tr_win, tr_wout, tr_out); };
  });

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus's test split");
  std::string ev_manifest, ev_model, ev_out = "eval.csv";
  std::size_t ev_stride = 1;
  ev->add_option("--manifest", ev_manifest)->required()->check(CLI::ExistingFile);
  ev->add_option("--model", ev_model)->required()->check(CLI::ExistingFile);
  ev->add_option("--eval-stride", ev_stride)->check(CLI::PositiveNumber)->capture_default_str();
  ev->add_option("-o,--output", ev_out, "Results CSV")->capture_default_str();
  ev->callback([&] { run = [&] { return cmd_eval(g, ev_manifest, ev_model, ev_stride, ev_out); }; });

  // sweep
  auto* sw = app.add_subcommand("sweep", "Train and evaluate one model per axis value");
  SweepFlags swf;
  StrategyFlags sw_strategy;
  TrainFlags sw_flags;
  sw->add_option("--axis", swf.axis)->required()->check(CLI::IsMember({"wout", "win", "strategy"}));
  sw->add_option("--values", swf.values, "Axis values (window lengths, or D in pixels for strategy)")
      ->required()
      ->delimiter(',');
  sw->add_option("--manifest", swf.manifest, "Corpus manifest (default: simulate --count throws)")
      ->check(CLI::ExistingFile);
  sw->add_option("--count", swf.count)->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("--w-in", swf.w_in, "Fixed w_in for the wout axis")->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("--w-out", swf.w_out, "Fixed w_out for the win axis")->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("--input-span-ms", swf.input_span_ms)->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("--output-span-ms", swf.output_span_ms)->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("-o,--output", swf.output, "Results CSV")->capture_default_str();
  sw_strategy.add(sw);
  sw_flags.add(sw);
  sw->callback([&] { run = [&] { return cmd_sweep(g, swf, sw_strategy, sw_flags); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    return run();
  } catch (const VerifyFailure& e) {
    std::cerr << "verify failed: " << e.what() << '\n';
    return kVerify;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kFormat;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kInvalid;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
