#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "evtraj/error.hpp"
#include "evtraj/seq2seq.hpp"

namespace evtraj {
namespace {

constexpr std::size_t kEvalChunk = 256;

void check_window_set(const WindowTensors& set, const char* name) {
  if (set.empty()) throw InvalidArgument(std::string(name) + " window set is empty");
  if (set.inputs.size() != set.targets.size()) {
    throw InvalidArgument(std::string(name) + " inputs/targets count mismatch");
  }
  const Index w_in = set.inputs.front().cols();
  const Index w_out = set.targets.front().cols();
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.inputs[i].cols() != w_in || set.targets[i].cols() != w_out) {
      throw InvalidArgument(std::string(name) + " windows differ in length");
    }
  }
}

}  // namespace

ValidationMetrics evaluate_windows(const Seq2SeqModel& model, const WindowTensors& windows) {
  check_window_set(windows, "evaluation");
  const auto& norm = model.normalization;
  const Index w_out = windows.targets.front().cols();
  double loss_sum = 0.0;
  double sq_px = 0.0;
  for (std::size_t start = 0; start < windows.size(); start += kEvalChunk) {
    const std::size_t n = std::min(kEvalChunk, windows.size() - start);
    const auto preds = forward_batch(
        model.params, std::span<const Matrix3Xd>(windows.inputs).subspan(start, n), w_out);
    for (std::size_t b = 0; b < n; ++b) {
      const Matrix3Xd& target = windows.targets[start + b];
      loss_sum += mse_loss(preds[b], target);
      const Matrix3Xd diff = preds[b] - target;
      sq_px += (diff.row(0).array() / norm.x_scale).square().sum() +
               (diff.row(1).array() / norm.y_scale).square().sum();
    }
  }
  const double count = static_cast<double>(windows.size());
  return {loss_sum / count, std::sqrt(sq_px / (count * static_cast<double>(w_out)))};
}

TrainResult train(Seq2SeqModel& model, const WindowTensors& train_set,
                  const WindowTensors& validation_set, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  check_window_set(train_set, "training");
  check_window_set(validation_set, "validation");
  if (config.epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (config.batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (!(config.adam.learning_rate >= 0.0) || !std::isfinite(config.adam.learning_rate)) {
    throw InvalidArgument("learning_rate must be finite and non-negative");
  }
  model.params.check_shapes();
  model.normalization.validate();

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Matrix3Xd> batch_in;
  std::vector<Matrix3Xd> batch_out;

  TrainResult result;
  Seq2SeqModel best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      batch_in.clear();
      batch_out.clear();
      for (std::size_t k = 0; k < n; ++k) {
        batch_in.push_back(train_set.inputs[order[start + k]]);
        batch_out.push_back(train_set.targets[order[start + k]]);
      }
      const Gradients g = backward(model.params, batch_in, batch_out);
      if (!std::isfinite(g.loss) || !g.grads.all_finite()) {
        throw NumericError("non-finite loss or gradient at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_index) +
                           " (loss = " + std::to_string(g.loss) + ")");
      }
      adam_step(model.optimizer, model.params, g.grads, config.adam);
      loss_sum += g.loss * static_cast<double>(n);
    }

    const ValidationMetrics val = evaluate_windows(model, validation_set);
    EpochStats stats{epoch, loss_sum / static_cast<double>(train_set.size()), val.loss,
                     val.spatial_rmse_px};
    if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.validation_loss)) {
      throw NumericError("non-finite loss after epoch " + std::to_string(epoch));
    }
    result.curve.push_back(stats);
    if (stats.validation_loss < best_loss) {
      best_loss = stats.validation_loss;
      result.best_epoch = epoch;
      if (config.restore_best) best = model;
    }
    if (on_epoch) on_epoch(stats);
  }
  if (config.restore_best) model = std::move(best);
  return result;
}

Matrix3Xd encode_points(std::span<const TrackPoint> points, std::size_t first, std::size_t count,
                        const NormalizationSpec& norm) {
  if (first + count > points.size()) throw InvalidArgument("encode_points: range out of bounds");
  Matrix3Xd out(kFeatureSize, static_cast<Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = first + k;
    const double dt_ms =
        i == 0 ? 0.0 : static_cast<double>(points[i].t_us - points[i - 1].t_us) / 1000.0;
    out.col(static_cast<Index>(k)) << points[i].x * norm.x_scale, points[i].y * norm.y_scale,
        dt_ms * norm.dt_scale;
  }
  return out;
}

std::vector<TrackPoint> predict(const Seq2SeqModel& model, std::span<const TrackPoint> recent,
                                Index w_in, Index w_out) {
  if (w_in < 1 || w_out < 1) throw InvalidArgument("w_in and w_out must be at least 1");
  const auto needed = static_cast<std::size_t>(w_in);
  if (recent.size() < needed) {
    throw InvalidArgument("predict needs at least " + std::to_string(needed) + " points, got " +
                          std::to_string(recent.size()));
  }
  const auto& norm = model.normalization;
  const Matrix3Xd input = encode_points(recent, recent.size() - needed, needed, norm);
  const Matrix3Xd out = forward(model.params, input, w_out);

  return denormalize_prediction(norm, out, recent.back().t_us);
}

std::vector<TrackPoint> denormalize_prediction(const NormalizationSpec& norm,
                                               const Matrix3Xd& output, std::int64_t last_t_us) {
  std::vector<TrackPoint> points;
  points.reserve(static_cast<std::size_t>(output.cols()));
  double arrival_us = static_cast<double>(last_t_us);
  for (Index k = 0; k < output.cols(); ++k) {
    arrival_us += output(2, k) / norm.dt_scale * 1000.0;
    points.push_back(
        {output(0, k) / norm.x_scale, output(1, k) / norm.y_scale, std::llround(arrival_us)});
  }
  return points;
}

}  // namespace evtraj
