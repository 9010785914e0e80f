#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "evtraj/seq2seq.hpp"
#include "oracles.hpp"

namespace gradcheck {

struct Report {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
};

// Relative error with a floor on the denominator for exactly-zero pairs.
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

// Analytic BPTT gradients against central differences for every parameter
// of one random model and sample. The perturbed losses come from the scalar
// reference run in long double: in double, the cancellation in
// L(theta + h) - L(theta - h) leaves ~1e-11 of noise in each difference
// quotient at h = 1e-5, which swamps gradient entries of order 1e-9.
inline Report check(std::uint64_t seed, Eigen::Index H, Eigen::Index w_in, Eigen::Index w_out,
                    double step = 1e-5) {
  using namespace evtraj;
  std::mt19937_64 rng(seed);
  Seq2SeqParams params = oracle::random_params(rng(), H);
  const Matrix3Xd input = oracle::random_sequence(rng, w_in);
  const Matrix3Xd target = oracle::random_sequence(rng, w_out);

  const Gradients g = backward(params, input, target);
  auto loss = [&] { return oracle::loss<long double>(params, input, target); };

  Report report;
  auto p_arrays = params.arrays();
  const auto g_arrays = std::as_const(g.grads).arrays();
  for (std::size_t a = 0; a < p_arrays.size(); ++a) {
    for (std::size_t k = 0; k < p_arrays[a].size(); ++k) {
      double& theta = p_arrays[a][k];
      const double saved = theta;
      const double up_at = saved + step, down_at = saved - step;
      theta = up_at;
      const long double up = loss();
      theta = down_at;
      const long double down = loss();
      theta = saved;
      // the realised step, exact in double
      const long double numeric = (up - down) / static_cast<long double>(up_at - down_at);
      report.max_rel_error =
          std::max(report.max_rel_error, relative_error(g_arrays[a][k], static_cast<double>(numeric)));
      ++report.parameters;
    }
  }
  return report;
}

}  // namespace gradcheck
