#include "evtraj/sampling.hpp"

#include <cmath>

#include "evtraj/error.hpp"
#include "evtraj/io.hpp"

namespace evtraj {
namespace {

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add_gaps(const SampledSequence& seq) {
    for (std::size_t i = 1; i < seq.points.size(); ++i) {
      const auto gap_us = seq.points[i].t_us - seq.points[i - 1].t_us;
      if (gap_us <= 0) throw InvalidArgument("sampled sequence timestamps not strictly increasing");
      const double rate = 1e6 / static_cast<double>(gap_us);
      sum += rate;
      sum_sq += rate * rate;
      ++count;
    }
  }

  RateStats stats() const {
    const double n = static_cast<double>(count);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return {mean, std::sqrt(var)};
  }
};

}  // namespace

void validate(const SamplingStrategy& strategy) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FixedRate>) {
          if (!(s.period_ms > 0.0) || !std::isfinite(s.period_ms)) {
            throw InvalidArgument("fixed-rate period must be positive");
          }
        } else {
          if (!(s.delta_px > 0.0) || !std::isfinite(s.delta_px)) {
            throw InvalidArgument("spatial delta must be positive");
          }
        }
      },
      strategy);
}

std::string describe(const SamplingStrategy& strategy) {
  if (const auto* f = std::get_if<FixedRate>(&strategy)) {
    return "fixed:" + format_double(f->period_ms) + "ms";
  }
  return "spatial:" + format_double(std::get<Spatial>(strategy).delta_px) + "px";
}

SampledSequence subsample(std::span<const TrackPoint> trajectory,
                          const SamplingStrategy& strategy) {
  validate(strategy);
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    if (trajectory[i].t_us < trajectory[i - 1].t_us) {
      throw InvalidArgument("trajectory not sorted by timestamp at index " + std::to_string(i));
    }
  }
  SampledSequence out{{}, strategy};
  if (trajectory.empty()) return out;
  out.points.push_back(trajectory.front());

  if (const auto* fixed = std::get_if<FixedRate>(&strategy)) {
    const double period_us = fixed->period_ms * 1000.0;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
      const TrackPoint& last = out.points.back();
      if (static_cast<double>(trajectory[i].t_us - last.t_us) >= period_us) {
        out.points.push_back(trajectory[i]);
      }
    }
  } else {
    const double delta = std::get<Spatial>(strategy).delta_px;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
      const TrackPoint& last = out.points.back();
      const TrackPoint& p = trajectory[i];
      if (p.t_us > last.t_us && std::hypot(p.x - last.x, p.y - last.y) >= delta) {
        out.points.push_back(p);
      }
    }
  }
  return out;
}

RateStats mean_rate(const SampledSequence& sequence) {
  if (sequence.points.size() < 2) throw InvalidArgument("mean_rate needs at least 2 points");
  Accumulator acc;
  acc.add_gaps(sequence);
  return acc.stats();
}

RateStats pooled_rate(std::span<const SampledSequence> sequences) {
  Accumulator acc;
  for (const auto& s : sequences) acc.add_gaps(s);
  if (acc.count == 0) throw InvalidArgument("pooled_rate needs at least one gap");
  return acc.stats();
}

std::vector<MatchedRate> matched_rate_pairs(std::span<const std::vector<TrackPoint>> trajectories,
                                            std::span<const double> deltas_px) {
  if (deltas_px.empty()) return {};
  if (trajectories.empty()) throw InvalidArgument("matched_rate_pairs needs trajectories");
  std::vector<MatchedRate> out;
  out.reserve(deltas_px.size());
  for (double d : deltas_px) {
    std::vector<SampledSequence> sampled;
    sampled.reserve(trajectories.size());
    for (const auto& traj : trajectories) sampled.push_back(subsample(traj, Spatial{d}));
    const RateStats rate = pooled_rate(sampled);
    out.push_back({d, rate.mean_hz, 1000.0 / rate.mean_hz});
  }
  return out;
}

}  // namespace evtraj
