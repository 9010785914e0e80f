#pragma once

// Straightforward reference implementations used as test oracles. They share
// no code with the library beyond the plain data types.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "evtraj/event_sim.hpp"
#include "evtraj/seq2seq.hpp"
#include "evtraj/types.hpp"

namespace oracle {

using Vec = std::vector<double>;

template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// T is the arithmetic type; the gradient check runs it in long double.
template <class T = double>
struct BasicCell {
  std::vector<T> h, c;
};
using Cell = BasicCell<double>;

// One LSTM step, element by element.
template <class T = double>
BasicCell<T> lstm_cell(const evtraj::LstmLayerParams& p, const std::vector<T>& x, const std::vector<T>& h,
                       const std::vector<T>& c) {
  const auto H = static_cast<std::size_t>(p.w_hh.cols());
  const auto I = static_cast<std::size_t>(p.w_ih.cols());
  std::vector<T> z(4 * H);
  for (std::size_t r = 0; r < 4 * H; ++r) {
    T acc = p.bias(static_cast<Eigen::Index>(r));
    for (std::size_t k = 0; k < I; ++k) {
      acc += T(p.w_ih(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k))) * x[k];
    }
    for (std::size_t k = 0; k < H; ++k) {
      acc += T(p.w_hh(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k))) * h[k];
    }
    z[r] = acc;
  }
  BasicCell<T> out{std::vector<T>(H), std::vector<T>(H)};
  for (std::size_t j = 0; j < H; ++j) {
    const T i = sigmoid(z[j]);
    const T f = sigmoid(z[H + j]);
    const T g = std::tanh(z[2 * H + j]);
    const T o = sigmoid(z[3 * H + j]);
    out.c[j] = f * c[j] + i * g;
    out.h[j] = o * std::tanh(out.c[j]);
  }
  return out;
}

template <class T = double>
std::vector<T> column(const evtraj::Matrix3Xd& m, Eigen::Index k) {
  return {T(m(0, k)), T(m(1, k)), T(m(2, k))};
}

template <class T = double>
BasicCell<T> encode(const evtraj::Seq2SeqParams& p, const evtraj::Matrix3Xd& input) {
  const auto H = static_cast<std::size_t>(p.hidden_size());
  BasicCell<T> s{std::vector<T>(H, T(0)), std::vector<T>(H, T(0))};
  for (Eigen::Index t = 0; t < input.cols(); ++t) s = lstm_cell<T>(p.encoder, column<T>(input, t), s.h, s.c);
  return s;
}

template <class T = double>
std::vector<std::vector<T>> decode(const evtraj::Seq2SeqParams& p, const BasicCell<T>& enc, int w_out) {
  const auto H = static_cast<std::size_t>(p.hidden_size());
  BasicCell<T> s = enc;
  std::vector<std::vector<T>> out;
  for (int t = 0; t < w_out; ++t) {
    s = lstm_cell<T>(p.decoder, enc.h, s.h, s.c);
    std::vector<T> y(3);
    for (std::size_t r = 0; r < 3; ++r) {
      T acc = p.readout.bias(static_cast<Eigen::Index>(r));
      for (std::size_t k = 0; k < H; ++k) {
        acc += T(p.readout.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k))) * s.h[k];
      }
      y[r] = acc;
    }
    out.push_back(y);
  }
  return out;
}

inline double mse(const evtraj::Matrix3Xd& a, const evtraj::Matrix3Xd& b) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    for (Eigen::Index r = 0; r < 3; ++r) sum += (a(r, k) - b(r, k)) * (a(r, k) - b(r, k));
  }
  return sum / static_cast<double>(3 * a.cols());
}

// Sequence-to-sequence MSE loss computed entirely in T.
template <class T>
T loss(const evtraj::Seq2SeqParams& p, const evtraj::Matrix3Xd& input, const evtraj::Matrix3Xd& target) {
  const auto out = decode<T>(p, encode<T>(p, input), static_cast<int>(target.cols()));
  T sum = 0;
  for (Eigen::Index k = 0; k < target.cols(); ++k) {
    for (Eigen::Index r = 0; r < 3; ++r) {
      const T d = out[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] - T(target(r, k));
      sum += d * d;
    }
  }
  return sum / T(3 * target.cols());
}

// Scalar Adam over a flat parameter vector.
struct Adam {
  double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Vec m, v;
  long step = 0;

  void update(Vec& theta, const Vec& g) {
    if (m.empty()) {
      m.assign(theta.size(), 0.0);
      v.assign(theta.size(), 0.0);
    }
    ++step;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double mh = m[k] / (1.0 - std::pow(b1, static_cast<double>(step)));
      const double vh = v[k] / (1.0 - std::pow(b2, static_cast<double>(step)));
      theta[k] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
};

inline Vec flatten(const evtraj::Seq2SeqParams& p) {
  Vec out;
  for (auto a : p.arrays()) out.insert(out.end(), a.begin(), a.end());
  return out;
}

// Pixels whose disc membership differs between two centres.
inline std::size_t changed_pixels(evtraj::Vec2 a, evtraj::Vec2 b, double r) {
  std::size_t n = 0;
  for (int y = 0; y < evtraj::kSensorHeight; ++y) {
    for (int x = 0; x < evtraj::kSensorWidth; ++x) {
      const bool in_a = (x - a.x) * (x - a.x) + (y - a.y) * (y - a.y) <= r * r;
      const bool in_b = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y) <= r * r;
      n += in_a != in_b;
    }
  }
  return n;
}

// Tracker written directly from its description.
inline std::vector<evtraj::TrackPoint> track(const std::vector<evtraj::Event>& events, double R,
                                             std::size_t threshold) {
  std::vector<evtraj::TrackPoint> out;
  bool locked = false;
  double cx = 0, cy = 0;
  std::vector<const evtraj::Event*> acc;
  for (const auto& e : events) {
    if (locked && (std::abs(e.x - cx) > R / 2 || std::abs(e.y - cy) > R / 2)) continue;
    acc.push_back(&e);
    if (acc.size() == threshold) {
      double sx = 0, sy = 0;
      for (auto* a : acc) {
        sx += a->x;
        sy += a->y;
      }
      cx = sx / static_cast<double>(threshold);
      cy = sy / static_cast<double>(threshold);
      locked = true;
      out.push_back({cx, cy, e.t_us});
      acc.clear();
    }
  }
  return out;
}

inline std::vector<evtraj::TrackPoint> sample_spatial(const std::vector<evtraj::TrackPoint>& in,
                                                      double D) {
  std::vector<evtraj::TrackPoint> out;
  for (const auto& p : in) {
    if (out.empty()) {
      out.push_back(p);
      continue;
    }
    const auto& l = out.back();
    if (p.t_us > l.t_us && std::sqrt((p.x - l.x) * (p.x - l.x) + (p.y - l.y) * (p.y - l.y)) >= D) {
      out.push_back(p);
    }
  }
  return out;
}

inline std::vector<evtraj::TrackPoint> sample_fixed(const std::vector<evtraj::TrackPoint>& in,
                                                    double F_ms) {
  std::vector<evtraj::TrackPoint> out;
  for (const auto& p : in) {
    if (out.empty() || static_cast<double>(p.t_us - out.back().t_us) >= F_ms * 1000.0) out.push_back(p);
  }
  return out;
}

inline evtraj::Seq2SeqParams random_params(std::uint64_t seed, Eigen::Index H, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  auto p = evtraj::Seq2SeqParams::zeros(H);
  for (auto a : p.arrays()) {
    for (double& v : a) v = u(rng);
  }
  return p;
}

inline evtraj::Matrix3Xd random_sequence(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  evtraj::Matrix3Xd m(3, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index r = 0; r < 3; ++r) m(r, k) = u(rng);
  }
  return m;
}

}  // namespace oracle
