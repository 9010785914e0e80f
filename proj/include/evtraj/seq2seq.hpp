#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "evtraj/types.hpp"

namespace evtraj {

using Eigen::Index;
using Eigen::Matrix3Xd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr Index kFeatureSize = 3;  // (X, Y, dT)
inline constexpr Index kDefaultHidden = 25;

/// One LSTM layer. Gate rows are stacked [input, forget, cell, output], each
/// block `hidden_size()` rows tall.
struct LstmLayerParams {
  MatrixXd w_ih;  // 4H x I
  MatrixXd w_hh;  // 4H x H
  VectorXd bias;  // 4H

  static LstmLayerParams zeros(Index input_size, Index hidden_size);

  Index input_size() const { return w_ih.cols(); }
  Index hidden_size() const { return w_hh.cols(); }
};

struct ReadoutParams {
  MatrixXd weight;  // O x H
  VectorXd bias;    // O
};

/// Trainable parameters of the encoder-decoder. Also used as the gradient
/// and Adam-moment container since all three share one shape.
struct Seq2SeqParams {
  LstmLayerParams encoder;  // I = 3
  LstmLayerParams decoder;  // I = H
  ReadoutParams readout;    // H -> 3

  static Seq2SeqParams zeros(Index hidden_size);
  Seq2SeqParams zeros_like() const { return zeros(hidden_size()); }

  Index hidden_size() const { return encoder.hidden_size(); }
  std::size_t parameter_count() const;

  /// Every parameter array in declared order (encoder w_ih, w_hh, bias,
  /// decoder w_ih, w_hh, bias, readout weight, bias). Storage order inside
  /// each array is Eigen's column-major layout.
  std::array<std::span<double>, 8> arrays();
  std::array<std::span<const double>, 8> arrays() const;

  bool all_finite() const;
  void check_shapes() const;
};

/// Maps pixels and milliseconds onto the network's unit scale.
struct NormalizationSpec {
  double x_scale = 1.0 / kSensorWidth;
  double y_scale = 1.0 / kSensorHeight;
  double dt_scale = 1.0 / 50.0;  // per millisecond

  void validate() const;
};

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::uint64_t step = 0;
  Seq2SeqParams m;
  Seq2SeqParams v;
};

struct Seq2SeqModel {
  Seq2SeqParams params;
  AdamState optimizer;
  NormalizationSpec normalization;

  /// All-zero parameters (and optimizer state).
  static Seq2SeqModel zeros(Index hidden_size = kDefaultHidden);
  /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights with forget-gate bias 1.
  static Seq2SeqModel initialized(std::uint64_t seed, Index hidden_size = kDefaultHidden);
};

// Cached activations of one cell step, enough to run its backward pass.
struct CellCache {
  VectorXd input;
  VectorXd h_prev;
  VectorXd c_prev;
  VectorXd gates;  // activated [i, f, g, o]
  VectorXd c;
  VectorXd tanh_c;
};

struct CellOutput {
  VectorXd h;
  VectorXd c;
  CellCache cache;
};

CellOutput lstm_cell_forward(const LstmLayerParams& params, const VectorXd& input,
                             const VectorXd& h, const VectorXd& c);

struct RecurrentState {
  VectorXd h;
  VectorXd c;
};

/// Runs the encoder over a 3 x w_in normalised sequence from a zero state.
RecurrentState encode(const Seq2SeqParams& params, const Matrix3Xd& input);

/// Unrolls the decoder from the encoder's final state, feeding the encoder's
/// final hidden vector at every step; returns 3 x w_out readouts.
Matrix3Xd decode(const Seq2SeqParams& params, const RecurrentState& state, Index w_out);

Matrix3Xd forward(const Seq2SeqParams& params, const Matrix3Xd& input, Index w_out);

/// Batched forward; every input must have the same length.
std::vector<Matrix3Xd> forward_batch(const Seq2SeqParams& params,
                                     std::span<const Matrix3Xd> inputs, Index w_out);

/// Mean squared error over all 3 x w_out components.
double mse_loss(const Matrix3Xd& prediction, const Matrix3Xd& target);

struct Gradients {
  double loss = 0.0;  // batch mean of per-sample mse_loss
  Seq2SeqParams grads;
};

/// Exact BPTT gradients of the batch-mean MSE with respect to every parameter.
Gradients backward(const Seq2SeqParams& params, std::span<const Matrix3Xd> inputs,
                   std::span<const Matrix3Xd> targets);

Gradients backward(const Seq2SeqParams& params, const Matrix3Xd& input, const Matrix3Xd& target);

/// Bias-corrected Adam update; increments the step counter.
void adam_step(AdamState& state, Seq2SeqParams& params, const Seq2SeqParams& grads,
               const AdamConfig& config);

/// Normalised training windows; inputs are 3 x w_in, targets 3 x w_out.
struct WindowTensors {
  std::vector<Matrix3Xd> inputs;
  std::vector<Matrix3Xd> targets;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
};

struct TrainConfig {
  AdamConfig adam;
  int epochs = 200;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  // Hand back the weights of the epoch with the lowest validation loss
  // instead of those of the last epoch.
  bool restore_best = false;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_spatial_rmse_px = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> curve;
  int best_epoch = 0;  // lowest validation loss, 1-based
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Mini-batch Adam on shuffled windows; the per-epoch curve records training
/// loss, validation loss and validation spatial RMSE in pixels.
TrainResult train(Seq2SeqModel& model, const WindowTensors& train_set,
                  const WindowTensors& validation_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

struct ValidationMetrics {
  double loss = 0.0;
  double spatial_rmse_px = 0.0;
};

ValidationMetrics evaluate_windows(const Seq2SeqModel& model, const WindowTensors& windows);

/// Encodes the last `w_in` points of `recent` (dT measured from the point
/// before each one, 0 for a sequence's first point), decodes `w_out` steps and
/// returns denormalised positions with cumulative arrival times.
std::vector<TrackPoint> predict(const Seq2SeqModel& model, std::span<const TrackPoint> recent,
                                Index w_in, Index w_out);

/// Converts normalised decoder output into pixel positions with arrival
/// times accumulated from `last_t_us`.
std::vector<TrackPoint> denormalize_prediction(const NormalizationSpec& norm,
                                               const Matrix3Xd& output, std::int64_t last_t_us);

/// Normalised (X, Y, dT) encoding of points[first, first + count) where dT of
/// point k is measured from point k-1 (0 for k = 0).
Matrix3Xd encode_points(std::span<const TrackPoint> points, std::size_t first, std::size_t count,
                        const NormalizationSpec& norm);

}  // namespace evtraj
