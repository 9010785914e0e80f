#include <cmath>

#include "evtraj/error.hpp"
#include "evtraj/seq2seq.hpp"

namespace evtraj {

void adam_step(AdamState& state, Seq2SeqParams& params, const Seq2SeqParams& grads,
               const AdamConfig& config) {
  auto p = params.arrays();
  const auto g = grads.arrays();
  auto m = state.m.arrays();
  auto v = state.v.arrays();
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (g[a].size() != p[a].size() || m[a].size() != p[a].size() || v[a].size() != p[a].size()) {
      throw InvalidArgument("adam_step: shape mismatch");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for (std::size_t a = 0; a < p.size(); ++a) {
    for (std::size_t i = 0; i < p[a].size(); ++i) {
      const double gi = g[a][i];
      m[a][i] = b1 * m[a][i] + (1.0 - b1) * gi;
      v[a][i] = b2 * v[a][i] + (1.0 - b2) * gi * gi;
      const double m_hat = m[a][i] / correction1;
      const double v_hat = v[a][i] / correction2;
      p[a][i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace evtraj
