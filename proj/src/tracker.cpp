#include "evtraj/tracker.hpp"

#include <cmath>
#include <string>

#include "evtraj/error.hpp"

namespace evtraj {

TrackerState tracker_init(double roi_size, std::size_t accum_threshold) {
  if (!(roi_size > 0.0) || !std::isfinite(roi_size)) {
    throw InvalidArgument("roi_size must be positive");
  }
  if (accum_threshold < 1) throw InvalidArgument("accum_threshold must be at least 1");
  TrackerState state;
  state.roi_size = roi_size;
  state.accum_threshold = accum_threshold;
  state.centre = {kSensorWidth / 2.0, kSensorHeight / 2.0};
  return state;
}

bool tracker_accepts(const TrackerState& state, const Event& event) {
  if (!state.initialized) return true;
  const double half = state.roi_size / 2.0;
  return std::abs(event.x - state.centre.x) <= half && std::abs(event.y - state.centre.y) <= half;
}

std::optional<TrackPoint> tracker_push(TrackerState& state, const Event& event) {
  if (event.x >= kSensorWidth || event.y >= kSensorHeight) {
    throw InvalidArgument("event outside sensor bounds");
  }
  if (!tracker_accepts(state, event)) return std::nullopt;

  state.sum_x += event.x;
  state.sum_y += event.y;
  ++state.accum_count;
  if (state.accum_count < state.accum_threshold) return std::nullopt;

  const auto n = static_cast<double>(state.accum_count);
  state.centre = {state.sum_x / n, state.sum_y / n};
  state.initialized = true;
  state.accum_count = 0;
  state.sum_x = 0.0;
  state.sum_y = 0.0;
  return TrackPoint{state.centre.x, state.centre.y, event.t_us};
}

std::vector<TrackPoint> track_stream(std::span<const Event> events, double roi_size,
                                     std::size_t accum_threshold) {
  TrackerState state = tracker_init(roi_size, accum_threshold);
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].t_us < events[i - 1].t_us) {
      throw InvalidArgument("event stream not sorted by timestamp at index " +
                            std::to_string(i));
    }
  }
  std::vector<TrackPoint> points;
  for (const Event& e : events) {
    if (auto p = tracker_push(state, e)) points.push_back(*p);
  }
  return points;
}

}  // namespace evtraj
