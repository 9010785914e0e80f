#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evtraj/types.hpp"

namespace evtraj {

/// Emit a sample every `period_ms` milliseconds (frame-camera-like).
struct FixedRate {
  double period_ms = 10.0;
  friend bool operator==(const FixedRate&, const FixedRate&) = default;
};

/// Emit a sample whenever the target moved `delta_px` pixels (Euclidean)
/// from the last emitted sample.
struct Spatial {
  double delta_px = 2.0;
  friend bool operator==(const Spatial&, const Spatial&) = default;
};

using SamplingStrategy = std::variant<FixedRate, Spatial>;

// Throws InvalidArgument unless the strategy's threshold is positive and finite.
void validate(const SamplingStrategy& strategy);
std::string describe(const SamplingStrategy& strategy);

struct SampledSequence {
  std::vector<TrackPoint> points;  // strictly increasing t_us
  SamplingStrategy strategy;
};

/// Greedy first-crossing sub-sampling. The first point is always kept; each
/// later point is kept when it is the first to reach the threshold relative
/// to the last kept point and its timestamp is strictly later.
SampledSequence subsample(std::span<const TrackPoint> trajectory, const SamplingStrategy& strategy);

struct RateStats {
  double mean_hz = 0.0;
  double std_hz = 0.0;  // population standard deviation
};

/// Mean and spread of the per-gap instantaneous rates 1/dt.
RateStats mean_rate(const SampledSequence& sequence);

/// Same statistic pooled over the gaps of several sequences.
RateStats pooled_rate(std::span<const SampledSequence> sequences);

struct MatchedRate {
  double delta_px = 0.0;
  double mean_rate_hz = 0.0;
  double period_ms = 0.0;  // fixed-rate period with the same mean rate
};

/// For each D, the mean spatial-sampling rate over the set and the matching
/// fixed-rate period F = 1000 / rate milliseconds.
std::vector<MatchedRate> matched_rate_pairs(std::span<const std::vector<TrackPoint>> trajectories,
                                            std::span<const double> deltas_px);

}  // namespace evtraj
