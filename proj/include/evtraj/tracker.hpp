#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "evtraj/types.hpp"

namespace evtraj {

inline constexpr double kDefaultRoiSize = 40.0;
// 40 events is about one full sweep of both disc edges across a pixel, which
// averages out the edge-ordering wobble of smaller batches.
inline constexpr std::size_t kDefaultAccumThreshold = 40;

/// Region-of-interest mean tracker for a single target.
///
/// Until the first update the ROI spans the whole sensor. Afterwards only
/// events inside the R x R square centred on the current centre are
/// accumulated; every `accum_threshold` accepted events the centre jumps to
/// their arithmetic mean and a TrackPoint is emitted.
struct TrackerState {
  Vec2 centre;
  double roi_size = kDefaultRoiSize;
  bool initialized = false;
  std::size_t accum_count = 0;
  std::size_t accum_threshold = kDefaultAccumThreshold;
  // Running sums of accepted pixel coordinates; exact for integer inputs.
  double sum_x = 0.0;
  double sum_y = 0.0;
};

TrackerState tracker_init(double roi_size = kDefaultRoiSize,
                          std::size_t accum_threshold = kDefaultAccumThreshold);

// True when (x, y) falls inside the current window.
bool tracker_accepts(const TrackerState& state, const Event& event);

std::optional<TrackPoint> tracker_push(TrackerState& state, const Event& event);

/// Sequential fold of tracker_push. Throws InvalidArgument on unsorted input.
std::vector<TrackPoint> track_stream(std::span<const Event> events,
                                     double roi_size = kDefaultRoiSize,
                                     std::size_t accum_threshold = kDefaultAccumThreshold);

}  // namespace evtraj
