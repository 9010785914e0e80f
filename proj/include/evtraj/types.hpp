#pragma once

#include <cstdint>

namespace evtraj {

// ATIS sensor geometry.
inline constexpr int kSensorWidth = 304;
inline constexpr int kSensorHeight = 240;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// One camera event: pixel column/row, microsecond timestamp and polarity
/// (true when the pixel brightened).
struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int64_t t_us = 0;
  bool polarity = false;

  friend bool operator==(const Event&, const Event&) = default;
};

/// A sub-pixel target position with its timestamp. Used for tracker output,
/// sub-sampled sequences and predictions alike.
struct TrackPoint {
  double x = 0.0;
  double y = 0.0;
  std::int64_t t_us = 0;

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

}  // namespace evtraj
