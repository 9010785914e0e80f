#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evtraj/types.hpp"

namespace evtraj {

struct BallState {
  Vec2 position;  // pixels
  Vec2 velocity;  // pixels / second
  double time = 0.0;  // seconds
};

/// Physical and sensor parameters of the bouncing-ball simulator. Image rows
/// grow downwards, so gravity is positive and the floor is a row index.
struct SimConfig {
  double gravity = 2250.0;        // px / s^2, ~0.4 s for a 180 px drop
  double restitution = 0.8;       // (0, 1]
  double floor_y = 230.0;         // pixel row the ball's lower edge hits
  double ball_radius = 8.0;       // px
  double event_rate_density = 1.0;  // expected events per changed pixel
  double noise_rate = 0.0;        // spurious events / s over the sensor
  double jitter_us = 20.0;        // max timestamp jitter, microseconds
  std::uint64_t seed = 0;
};

/// Ballistic flight with coefficient-of-restitution floor bounces. Returns
/// states at initial.time + k*dt for k = 0 .. floor(duration/dt).
std::vector<BallState> simulate_trajectory(const SimConfig& config, const BallState& initial,
                                           double duration, double dt);

/// Silhouette-change events between consecutive states, plus uniform
/// background noise, sorted by timestamp. Deterministic given config.seed.
std::vector<Event> generate_events(std::span<const BallState> states, const SimConfig& config);

/// Ball centre linearly interpolated between the bracketing states at time
/// `t` seconds (clamped to the trajectory's time span).
Vec2 interpolate_centre(std::span<const BallState> states, double t);

}  // namespace evtraj
