#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evtraj/dataset.hpp"
#include "evtraj/sampling.hpp"
#include "evtraj/seq2seq.hpp"

namespace evtraj {

/// Index-paired prediction error: spatial RMSE of Euclidean pixel distance
/// and temporal RMSE of arrival-time difference.
struct ErrorDecomposition {
  double spatial_rmse_px = 0.0;
  double temporal_rmse_ms = 0.0;
  std::size_t n_points = 0;
};

ErrorDecomposition error_decompose(std::span<const TrackPoint> prediction,
                                   std::span<const TrackPoint> truth);

/// Pools squared errors over many prediction windows.
class ErrorAccumulator {
 public:
  void add(std::span<const TrackPoint> prediction, std::span<const TrackPoint> truth);
  ErrorDecomposition result() const;
  std::size_t windows() const { return windows_; }

 private:
  double sq_px_ = 0.0;
  double sq_ms_ = 0.0;
  std::size_t points_ = 0;
  std::size_t windows_ = 0;
};

enum class SweepAxis { WOut, WIn, FixedRateF, SpatialD };

std::string_view to_string(SweepAxis axis);

struct SweepPoint {
  double axis_value = 0.0;
  ErrorDecomposition error;
  std::optional<double> mean_rate_hz;
  std::size_t n_test_windows = 0;
  Index w_in = 0;
  Index w_out = 0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::WOut;
  std::vector<SweepPoint> points;
};

/// Training and evaluation budget shared by every point of a sweep. The
/// model initialisation and batch shuffling both derive from train.seed, so
/// every sweep point starts from the same weights.
struct ExperimentConfig {
  TrainConfig train;
  Index hidden_size = kDefaultHidden;
  std::size_t train_stride = 1;  // window stride for training/validation sets
  std::size_t eval_stride = 1;   // window stride for the test set
};

/// Everything produced by one trained condition.
struct ConditionResult {
  ErrorDecomposition test_error;
  std::size_t n_test_windows = 0;
  double mean_rate_hz = 0.0;
  TrainResult training;
  Seq2SeqModel model;
};

/// Samples the raw tracks with `strategy`, trains one model on the training
/// split and evaluates it on the test split. Windows whose target starts
/// before `min_target_start` are skipped everywhere so that conditions with
/// different w_in predict identical segments.
ConditionResult run_condition(std::span<const RawTrack> tracks, std::span<const Split> splits,
                              const SamplingStrategy& strategy, Index w_in, Index w_out,
                              const ExperimentConfig& config, std::size_t min_target_start = 0);

/// Evaluates a trained model on the test split of an already-built corpus.
ConditionResult evaluate_model(const Seq2SeqModel& model, const TrajectoryCorpus& corpus,
                               Index w_in, Index w_out, std::size_t eval_stride = 1,
                               std::size_t min_target_start = 0);

SweepResult sweep_wout(std::span<const RawTrack> tracks, std::span<const Split> splits,
                       const SamplingStrategy& strategy, Index w_in,
                       std::span<const Index> w_out_values, const ExperimentConfig& config);

/// Every w_in value predicts the same target segments (those starting at or
/// after the largest w_in).
SweepResult sweep_win(std::span<const RawTrack> tracks, std::span<const Split> splits,
                      const SamplingStrategy& strategy, Index w_out,
                      std::span<const Index> w_in_values, const ExperimentConfig& config);

struct StrategyComparison {
  SweepResult spatial;     // axis SpatialD
  SweepResult fixed_rate;  // axis FixedRateF, one point per D at the matched rate
  std::vector<MatchedRate> matched;
};

/// For each D, spatially samples the raw tracks, fixes F at the same mean
/// rate and trains/evaluates both with windows spanning `input_span_ms` and
/// `output_span_ms` at that rate.
StrategyComparison compare_strategies(std::span<const RawTrack> tracks,
                                      std::span<const Split> splits,
                                      std::span<const double> deltas_px,
                                      const ExperimentConfig& config,
                                      double input_span_ms = 90.0, double output_span_ms = 200.0);

// Window length in points covering `span_ms` at `rate_hz` (at least `minimum`).
Index points_for_span(double span_ms, double rate_hz, Index minimum);

struct RateSample {
  std::int64_t t_us = 0;
  double rate_hz = 0.0;
};

/// Sliding-window sample rate: at every point whose trailing window of
/// `window_ms` lies inside the sequence, the number of points in
/// (t - window, t] divided by the window length.
std::vector<RateSample> rate_profile(const SampledSequence& sequence, double window_ms);

/// Population standard deviation of a rate profile.
double profile_std(std::span<const RateSample> profile);

/// `axis,axis_value,spatial_rmse_px,temporal_rmse_ms,mean_rate_hz,n_test_windows`
void write_results_csv(std::ostream& out, std::span<const SweepResult> sweeps);

}  // namespace evtraj
