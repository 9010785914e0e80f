#include "evtraj/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "evtraj/error.hpp"
#include "evtraj/io.hpp"
#include "evtraj/seed.hpp"

namespace evtraj {
namespace {

constexpr std::size_t kEvalChunk = 256;

bool window_allowed(std::size_t offset, std::size_t w_in, std::size_t min_target_start) {
  return offset + w_in >= min_target_start;
}

WindowTensors split_windows(const TrajectoryCorpus& corpus, Split split, std::size_t w_in,
                            std::size_t w_out, std::size_t stride, std::size_t min_target_start,
                            const NormalizationSpec& norm) {
  std::vector<WindowPair> windows;
  for (const CorpusEntry* e : corpus.in_split(split)) {
    for (auto& w : make_windows(e->sequence, w_in, w_out, stride, e->source_id)) {
      if (window_allowed(w.offset, w_in, min_target_start)) windows.push_back(std::move(w));
    }
  }
  return to_tensors(windows, norm);
}

void check_axis(std::span<const Index> values) {
  if (values.empty()) throw InvalidArgument("sweep needs at least one axis value");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] <= values[i - 1]) throw InvalidArgument("sweep axis values must be strictly increasing");
  }
}

SweepPoint to_point(double axis_value, const ConditionResult& r, Index w_in, Index w_out) {
  return {axis_value, r.test_error, r.mean_rate_hz, r.n_test_windows, w_in, w_out};
}

}  // namespace

ErrorDecomposition error_decompose(std::span<const TrackPoint> prediction,
                                   std::span<const TrackPoint> truth) {
  ErrorAccumulator acc;
  acc.add(prediction, truth);
  return acc.result();
}

void ErrorAccumulator::add(std::span<const TrackPoint> prediction,
                           std::span<const TrackPoint> truth) {
  if (prediction.size() != truth.size()) {
    throw InvalidArgument("error_decompose: prediction and truth lengths differ");
  }
  for (std::size_t k = 0; k < prediction.size(); ++k) {
    const double dx = prediction[k].x - truth[k].x;
    const double dy = prediction[k].y - truth[k].y;
    const double dt_ms = static_cast<double>(prediction[k].t_us - truth[k].t_us) / 1000.0;
    sq_px_ += dx * dx + dy * dy;
    sq_ms_ += dt_ms * dt_ms;
  }
  points_ += prediction.size();
  ++windows_;
}

ErrorDecomposition ErrorAccumulator::result() const {
  if (points_ == 0) return {};
  const double n = static_cast<double>(points_);
  return {std::sqrt(sq_px_ / n), std::sqrt(sq_ms_ / n), points_};
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::WOut:
      return "w_out";
    case SweepAxis::WIn:
      return "w_in";
    case SweepAxis::FixedRateF:
      return "fixed_rate_F";
    case SweepAxis::SpatialD:
      return "spatial_D";
  }
  return "w_out";
}

ConditionResult evaluate_model(const Seq2SeqModel& model, const TrajectoryCorpus& corpus,
                               Index w_in, Index w_out, std::size_t eval_stride,
                               std::size_t min_target_start) {
  if (w_in < 1 || w_out < 1) throw InvalidArgument("w_in and w_out must be at least 1");
  if (eval_stride < 1) throw InvalidArgument("eval stride must be at least 1");
  const auto n_in = static_cast<std::size_t>(w_in);
  const auto n_out = static_cast<std::size_t>(w_out);

  // (entry, offset) for every test window.
  std::vector<std::pair<const CorpusEntry*, std::size_t>> jobs;
  for (const CorpusEntry* e : corpus.in_split(Split::Test)) {
    const auto& pts = e->sequence.points;
    for (std::size_t off = 0; off + n_in + n_out <= pts.size(); off += eval_stride) {
      if (window_allowed(off, n_in, min_target_start)) jobs.emplace_back(e, off);
    }
  }
  if (jobs.empty()) throw InvalidArgument("test split yields no evaluation windows");

  ErrorAccumulator acc;
  std::vector<Matrix3Xd> inputs;
  for (std::size_t start = 0; start < jobs.size(); start += kEvalChunk) {
    const std::size_t n = std::min(kEvalChunk, jobs.size() - start);
    inputs.clear();
    for (std::size_t k = 0; k < n; ++k) {
      const auto& [e, off] = jobs[start + k];
      inputs.push_back(encode_points(e->sequence.points, off, n_in, model.normalization));
    }
    const auto outputs = forward_batch(model.params, inputs, w_out);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& [e, off] = jobs[start + k];
      const auto& pts = e->sequence.points;
      const auto pred = denormalize_prediction(model.normalization, outputs[k], pts[off + n_in - 1].t_us);
      acc.add(pred, std::span<const TrackPoint>(pts).subspan(off + n_in, n_out));
    }
  }

  ConditionResult result;
  result.test_error = acc.result();
  result.n_test_windows = acc.windows();
  result.model = model;
  return result;
}

ConditionResult run_condition(std::span<const RawTrack> tracks, std::span<const Split> splits,
                              const SamplingStrategy& strategy, Index w_in, Index w_out,
                              const ExperimentConfig& config, std::size_t min_target_start) {
  if (w_in < 1 || w_out < 1) throw InvalidArgument("w_in and w_out must be at least 1");
  const TrajectoryCorpus corpus = build_corpus(tracks, strategy, splits);
  Seq2SeqModel model =
      Seq2SeqModel::initialized(derive_seed(config.train.seed, seed_stream::kInit), config.hidden_size);

  const auto n_in = static_cast<std::size_t>(w_in);
  const auto n_out = static_cast<std::size_t>(w_out);
  const WindowTensors train_set = split_windows(corpus, Split::Train, n_in, n_out, config.train_stride,
                                                min_target_start, model.normalization);
  const WindowTensors val_set = split_windows(corpus, Split::Validation, n_in, n_out,
                                              config.train_stride, min_target_start, model.normalization);
  if (train_set.empty() || val_set.empty()) {
    throw InvalidArgument("corpus too short for w_in=" + std::to_string(w_in) +
                          ", w_out=" + std::to_string(w_out));
  }

  TrainConfig train_config = config.train;
  train_config.seed = derive_seed(config.train.seed, seed_stream::kShuffle);
  TrainResult training = train(model, train_set, val_set, train_config);

  ConditionResult result = evaluate_model(model, corpus, w_in, w_out, config.eval_stride, min_target_start);
  result.training = std::move(training);

  std::vector<SampledSequence> sequences;
  for (const auto& e : corpus.entries) {
    if (!e.flipped && e.sequence.points.size() >= 2) sequences.push_back(e.sequence);
  }
  result.mean_rate_hz = pooled_rate(sequences).mean_hz;
  return result;
}

SweepResult sweep_wout(std::span<const RawTrack> tracks, std::span<const Split> splits,
                       const SamplingStrategy& strategy, Index w_in,
                       std::span<const Index> w_out_values, const ExperimentConfig& config) {
  check_axis(w_out_values);
  SweepResult sweep{SweepAxis::WOut, {}};
  for (Index w_out : w_out_values) {
    const auto r = run_condition(tracks, splits, strategy, w_in, w_out, config);
    sweep.points.push_back(to_point(static_cast<double>(w_out), r, w_in, w_out));
  }
  return sweep;
}

SweepResult sweep_win(std::span<const RawTrack> tracks, std::span<const Split> splits,
                      const SamplingStrategy& strategy, Index w_out,
                      std::span<const Index> w_in_values, const ExperimentConfig& config) {
  check_axis(w_in_values);
  const auto aligned = static_cast<std::size_t>(w_in_values.back());
  SweepResult sweep{SweepAxis::WIn, {}};
  for (Index w_in : w_in_values) {
    const auto r = run_condition(tracks, splits, strategy, w_in, w_out, config, aligned);
    sweep.points.push_back(to_point(static_cast<double>(w_in), r, w_in, w_out));
  }
  return sweep;
}

Index points_for_span(double span_ms, double rate_hz, Index minimum) {
  if (!(span_ms > 0.0) || !(rate_hz > 0.0)) throw InvalidArgument("span and rate must be positive");
  return std::max<Index>(minimum, static_cast<Index>(std::llround(span_ms * rate_hz / 1000.0)));
}

StrategyComparison compare_strategies(std::span<const RawTrack> tracks,
                                      std::span<const Split> splits,
                                      std::span<const double> deltas_px,
                                      const ExperimentConfig& config, double input_span_ms,
                                      double output_span_ms) {
  if (deltas_px.empty()) throw InvalidArgument("compare_strategies needs at least one delta");
  for (std::size_t i = 1; i < deltas_px.size(); ++i) {
    if (deltas_px[i] <= deltas_px[i - 1]) throw InvalidArgument("deltas must be strictly increasing");
  }
  std::vector<std::vector<TrackPoint>> raw;
  raw.reserve(tracks.size());
  for (const auto& t : tracks) raw.push_back(t.points);

  StrategyComparison out;
  out.spatial.axis = SweepAxis::SpatialD;
  out.fixed_rate.axis = SweepAxis::FixedRateF;
  out.matched = matched_rate_pairs(raw, deltas_px);
  for (const MatchedRate& m : out.matched) {
    const Index w_in = points_for_span(input_span_ms, m.mean_rate_hz, 2);
    const Index w_out = points_for_span(output_span_ms, m.mean_rate_hz, 1);
    const auto spatial = run_condition(tracks, splits, Spatial{m.delta_px}, w_in, w_out, config);
    out.spatial.points.push_back(to_point(m.delta_px, spatial, w_in, w_out));
    const auto fixed = run_condition(tracks, splits, FixedRate{m.period_ms}, w_in, w_out, config);
    out.fixed_rate.points.push_back(to_point(m.period_ms, fixed, w_in, w_out));
  }
  return out;
}

std::vector<RateSample> rate_profile(const SampledSequence& sequence, double window_ms) {
  if (!(window_ms > 0.0)) throw InvalidArgument("rate window must be positive");
  const auto& pts = sequence.points;
  if (pts.size() < 2) throw InvalidArgument("rate_profile needs at least 2 points");
  const double window_us = window_ms * 1000.0;
  std::vector<RateSample> profile;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t = static_cast<double>(pts[i].t_us);
    if (t - static_cast<double>(pts.front().t_us) < window_us) continue;
    while (static_cast<double>(pts[lo].t_us) <= t - window_us) ++lo;
    const double count = static_cast<double>(i - lo + 1);
    profile.push_back({pts[i].t_us, count / (window_ms / 1000.0)});
  }
  if (profile.empty()) throw InvalidArgument("sequence shorter than the rate window");
  return profile;
}

double profile_std(std::span<const RateSample> profile) {
  if (profile.empty()) throw InvalidArgument("empty rate profile");
  double sum = 0.0;
  for (const auto& s : profile) sum += s.rate_hz;
  const double mean = sum / static_cast<double>(profile.size());
  double var = 0.0;
  for (const auto& s : profile) var += (s.rate_hz - mean) * (s.rate_hz - mean);
  return std::sqrt(var / static_cast<double>(profile.size()));
}

void write_results_csv(std::ostream& out, std::span<const SweepResult> sweeps) {
  out << "axis,axis_value,spatial_rmse_px,temporal_rmse_ms,mean_rate_hz,n_test_windows\n";
  for (const auto& sweep : sweeps) {
    for (const auto& p : sweep.points) {
      out << to_string(sweep.axis) << ',' << format_double(p.axis_value) << ','
          << format_double(p.error.spatial_rmse_px) << ',' << format_double(p.error.temporal_rmse_ms)
          << ',' << (p.mean_rate_hz ? format_double(*p.mean_rate_hz) : std::string()) << ','
          << p.n_test_windows << '\n';
    }
  }
  if (!out) throw IoError("failed writing results CSV");
}

}  // namespace evtraj
