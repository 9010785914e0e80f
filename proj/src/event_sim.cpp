#include "evtraj/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "evtraj/error.hpp"

namespace evtraj {
namespace {

bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

void validate(const SimConfig& config) {
  if (!(config.restitution > 0.0 && config.restitution <= 1.0)) {
    throw InvalidArgument("restitution must lie in (0, 1]");
  }
  if (!(config.gravity >= 0.0) || !std::isfinite(config.gravity)) {
    throw InvalidArgument("gravity must be finite and non-negative");
  }
  if (!(config.ball_radius > 0.0) || !std::isfinite(config.ball_radius)) {
    throw InvalidArgument("ball_radius must be positive");
  }
  if (!(config.event_rate_density >= 0.0) || !(config.noise_rate >= 0.0) ||
      !(config.jitter_us >= 0.0) || !std::isfinite(config.event_rate_density) ||
      !std::isfinite(config.noise_rate) || !std::isfinite(config.jitter_us)) {
    throw InvalidArgument("rates and jitter must be finite and non-negative");
  }
  if (!std::isfinite(config.floor_y)) throw InvalidArgument("floor_y must be finite");
}

// Time until the lower edge reaches the floor while falling, or +inf.
double time_to_floor(double y, double vy, double floor_centre, double g) {
  const double gap = floor_centre - y;  // >= 0 while above the floor
  if (g == 0.0) {
    return vy > 0.0 ? std::max(gap, 0.0) / vy : std::numeric_limits<double>::infinity();
  }
  const double disc = vy * vy + 2.0 * g * std::max(gap, 0.0);
  const double root = std::sqrt(disc);
  if (vy >= 0.0) {
    const double denom = vy + root;
    return denom > 0.0 ? 2.0 * std::max(gap, 0.0) / denom : 0.0;
  }
  return (-vy + root) / g;
}

// Below this rebound speed the ball is put to rest on the floor (the apex of
// the next hop would be under 0.05 px).
double rest_speed(double g) { return std::sqrt(2.0 * g * 0.05); }

std::int64_t to_us(double seconds) { return std::llround(seconds * 1e6); }

// Fraction of the step at which a pixel crosses the disc boundary.
double crossing_fraction(double px, double py, const Vec2& c0, const Vec2& c1, double r,
                         bool entering) {
  const double dx = c1.x - c0.x;
  const double dy = c1.y - c0.y;
  const double ox = px - c0.x;
  const double oy = py - c0.y;
  const double a = dx * dx + dy * dy;
  if (a == 0.0) return 0.5;
  const double b = -2.0 * (ox * dx + oy * dy);
  const double c = ox * ox + oy * oy - r * r;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return 0.5;
  const double root = std::sqrt(disc);
  const double s = entering ? (-b - root) / (2.0 * a) : (-b + root) / (2.0 * a);
  return std::clamp(s, 0.0, 1.0);
}

}  // namespace

std::vector<BallState> simulate_trajectory(const SimConfig& config, const BallState& initial,
                                           double duration, double dt) {
  validate(config);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InvalidArgument("duration must be positive");
  }
  if (!finite(initial.position) || !finite(initial.velocity) || !std::isfinite(initial.time) ||
      initial.time < 0.0) {
    throw InvalidArgument("initial ball state must be finite with non-negative time");
  }

  const double g = config.gravity;
  const double e = config.restitution;
  const double floor_centre = config.floor_y - config.ball_radius;
  const auto steps = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));

  std::vector<BallState> out;
  out.reserve(steps + 1);
  BallState s = initial;
  bool resting = false;
  if (s.position.y > floor_centre) s.position.y = floor_centre;
  out.push_back(s);

  for (std::size_t k = 1; k <= steps; ++k) {
    double remaining = dt;
    while (remaining > 0.0) {
      if (resting) {
        s.position.x += s.velocity.x * remaining;
        remaining = 0.0;
        break;
      }
      const double tau = time_to_floor(s.position.y, s.velocity.y, floor_centre, g);
      if (tau > remaining) {
        s.position.x += s.velocity.x * remaining;
        s.position.y += s.velocity.y * remaining + 0.5 * g * remaining * remaining;
        s.velocity.y += g * remaining;
        remaining = 0.0;
        break;
      }
      s.position.x += s.velocity.x * tau;
      const double impact = s.velocity.y + g * tau;
      s.position.y = floor_centre;
      s.velocity.y = -e * impact;
      remaining -= tau;
      if (-s.velocity.y < rest_speed(g)) {
        s.velocity.y = 0.0;
        resting = true;
      }
    }
    s.time = initial.time + static_cast<double>(k) * dt;
    out.push_back(s);
  }
  return out;
}

std::vector<Event> generate_events(std::span<const BallState> states, const SimConfig& config) {
  validate(config);
  if (states.size() < 2) throw InvalidArgument("generate_events needs at least 2 states");
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (!(states[i].time > states[i - 1].time)) {
      throw InvalidArgument("states must be strictly ordered in time (index " +
                            std::to_string(i) + ")");
    }
  }
  if (states.front().time < 0.0) throw InvalidArgument("state times must be non-negative");

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = config.ball_radius;
  const double r2 = r * r;
  const double whole = std::floor(config.event_rate_density);
  const double frac = config.event_rate_density - whole;
  const auto base_count = static_cast<int>(whole);

  const std::int64_t t_begin = to_us(states.front().time);
  const std::int64_t t_end = to_us(states.back().time);
  std::vector<Event> events;
  for (std::size_t i = 1; i < states.size(); ++i) {
    const Vec2 c0 = states[i - 1].position;
    const Vec2 c1 = states[i].position;
    const std::int64_t t0 = to_us(states[i - 1].time);
    const std::int64_t t1 = to_us(states[i].time);

    const int x_lo = std::max(0, static_cast<int>(std::floor(std::min(c0.x, c1.x) - r)) - 1);
    const int x_hi =
        std::min(kSensorWidth - 1, static_cast<int>(std::ceil(std::max(c0.x, c1.x) + r)) + 1);
    const int y_lo = std::max(0, static_cast<int>(std::floor(std::min(c0.y, c1.y) - r)) - 1);
    const int y_hi =
        std::min(kSensorHeight - 1, static_cast<int>(std::ceil(std::max(c0.y, c1.y) + r)) + 1);

    for (int py = y_lo; py <= y_hi; ++py) {
      for (int px = x_lo; px <= x_hi; ++px) {
        const double ax = px - c0.x, ay = py - c0.y;
        const double bx = px - c1.x, by = py - c1.y;
        const bool in0 = ax * ax + ay * ay <= r2;
        const bool in1 = bx * bx + by * by <= r2;
        if (in0 == in1) continue;

        int count = base_count;
        if (frac > 0.0 && unit(rng) < frac) ++count;
        if (count == 0) continue;
        const double s = crossing_fraction(px, py, c0, c1, r, in1);
        const double t_mid = static_cast<double>(t0) + s * static_cast<double>(t1 - t0);
        for (int n = 0; n < count; ++n) {
          const double jitter = (2.0 * unit(rng) - 1.0) * config.jitter_us;
          const auto t = std::clamp<std::int64_t>(std::llround(t_mid + jitter), t_begin, t_end);
          events.push_back(Event{static_cast<std::uint16_t>(px), static_cast<std::uint16_t>(py),
                                 t, in1});
        }
      }
    }
  }

  if (config.noise_rate > 0.0) {
    const double span = states.back().time - states.front().time;
    std::poisson_distribution<long long> count_dist(config.noise_rate * span);
    const long long n = count_dist(rng);
    const std::int64_t t_first = to_us(states.front().time);
    const std::int64_t t_last = to_us(states.back().time);
    std::uniform_int_distribution<int> col(0, kSensorWidth - 1);
    std::uniform_int_distribution<int> row(0, kSensorHeight - 1);
    std::uniform_int_distribution<std::int64_t> when(t_first, t_last);
    std::bernoulli_distribution pol(0.5);
    events.reserve(events.size() + static_cast<std::size_t>(n));
    for (long long k = 0; k < n; ++k) {
      const auto x = static_cast<std::uint16_t>(col(rng));
      const auto y = static_cast<std::uint16_t>(row(rng));
      const auto t = when(rng);
      events.push_back(Event{x, y, t, pol(rng)});
    }
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
  return events;
}

Vec2 interpolate_centre(std::span<const BallState> states, double t) {
  if (states.empty()) throw InvalidArgument("interpolate_centre needs at least one state");
  if (t <= states.front().time) return states.front().position;
  if (t >= states.back().time) return states.back().position;
  const auto it = std::upper_bound(states.begin(), states.end(), t,
                                   [](double v, const BallState& s) { return v < s.time; });
  const BallState& b = *it;
  const BallState& a = *(it - 1);
  const double s = (t - a.time) / (b.time - a.time);
  return {a.position.x + s * (b.position.x - a.position.x),
          a.position.y + s * (b.position.y - a.position.y)};
}

}  // namespace evtraj
