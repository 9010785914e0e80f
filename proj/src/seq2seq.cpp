#include "evtraj/seq2seq.hpp"

#include <cmath>
#include <random>
#include <string>

#include "evtraj/error.hpp"

namespace evtraj {
namespace {

// Activated gates and states of one unrolled step for a whole batch.
struct StepTrace {
  MatrixXd gates;  // 4H x B
  MatrixXd c;      // H x B
  MatrixXd tanh_c;
  MatrixXd h;
};

struct BatchTrace {
  std::vector<MatrixXd> enc_inputs;  // 3 x B per step
  std::vector<StepTrace> enc;
  std::vector<StepTrace> dec;
};

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  return 1.0 / (1.0 + (-z).exp());
}

// z (4H x B pre-activations) -> activated gates in place.
void activate(MatrixXd& z, Index hidden) {
  z.topRows(2 * hidden).array() = sigmoid(z.topRows(2 * hidden).array());
  z.middleRows(2 * hidden, hidden).array() = z.middleRows(2 * hidden, hidden).array().tanh();
  z.bottomRows(hidden).array() = sigmoid(z.bottomRows(hidden).array());
}

// One batched cell step; `pre` already holds W_ih x + b.
StepTrace cell_step(const LstmLayerParams& p, MatrixXd pre, const MatrixXd& h_prev,
                    const MatrixXd& c_prev) {
  const Index hidden = p.hidden_size();
  pre.noalias() += p.w_hh * h_prev;
  activate(pre, hidden);
  StepTrace s;
  s.c = pre.middleRows(hidden, hidden).cwiseProduct(c_prev) +
        pre.topRows(hidden).cwiseProduct(pre.middleRows(2 * hidden, hidden));
  s.tanh_c = s.c.array().tanh().matrix();
  s.h = pre.bottomRows(hidden).cwiseProduct(s.tanh_c);
  s.gates = std::move(pre);
  return s;
}

void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw InvalidArgument(std::string("non-finite values in ") + what);
}

void check_sequence(const Matrix3Xd& seq, const char* what) {
  if (seq.cols() < 1) throw InvalidArgument(std::string(what) + " must contain at least 1 step");
  if (!seq.allFinite()) throw InvalidArgument(std::string("non-finite values in ") + what);
}

// Runs encoder and decoder over a batch, optionally keeping every activation.
std::vector<MatrixXd> forward_impl(const Seq2SeqParams& params, std::span<const Matrix3Xd> inputs,
                                   Index w_out, BatchTrace* trace) {
  if (inputs.empty()) throw InvalidArgument("empty batch");
  if (w_out < 1) throw InvalidArgument("w_out must be at least 1");
  const Index w_in = inputs.front().cols();
  for (const auto& in : inputs) {
    check_sequence(in, "input sequence");
    if (in.cols() != w_in) throw InvalidArgument("batched inputs differ in length");
  }
  const Index batch = static_cast<Index>(inputs.size());
  const Index hidden = params.hidden_size();
  const auto& enc = params.encoder;
  const auto& dec = params.decoder;

  MatrixXd h = MatrixXd::Zero(hidden, batch);
  MatrixXd c = MatrixXd::Zero(hidden, batch);
  MatrixXd x(kFeatureSize, batch);
  for (Index t = 0; t < w_in; ++t) {
    for (Index b = 0; b < batch; ++b) x.col(b) = inputs[static_cast<std::size_t>(b)].col(t);
    MatrixXd pre = enc.w_ih * x;
    pre.colwise() += enc.bias;
    StepTrace s = cell_step(enc, std::move(pre), h, c);
    h = s.h;
    c = s.c;
    if (trace) {
      trace->enc_inputs.push_back(x);
      trace->enc.push_back(std::move(s));
    }
  }

  // The decoder sees the encoder's final hidden vector at every step, so its
  // input projection is shared across the unroll.
  MatrixXd dec_in = dec.w_ih * h;
  dec_in.colwise() += dec.bias;
  std::vector<MatrixXd> outputs;
  outputs.reserve(static_cast<std::size_t>(w_out));
  for (Index k = 0; k < w_out; ++k) {
    StepTrace s = cell_step(dec, dec_in, h, c);
    h = s.h;
    c = s.c;
    MatrixXd y = params.readout.weight * h;
    y.colwise() += params.readout.bias;
    outputs.push_back(std::move(y));
    if (trace) trace->dec.push_back(std::move(s));
  }
  return outputs;
}

// Gate pre-activation gradients from dh, dc (total) of one step.
MatrixXd gate_grads(const StepTrace& s, const MatrixXd& dh, const MatrixXd& dc,
                    const MatrixXd& c_prev, Index hidden) {
  const auto i = s.gates.topRows(hidden).array();
  const auto f = s.gates.middleRows(hidden, hidden).array();
  const auto g = s.gates.middleRows(2 * hidden, hidden).array();
  const auto o = s.gates.bottomRows(hidden).array();
  MatrixXd dz(4 * hidden, s.gates.cols());
  dz.topRows(hidden).array() = dc.array() * g * i * (1.0 - i);
  dz.middleRows(hidden, hidden).array() = dc.array() * c_prev.array() * f * (1.0 - f);
  dz.middleRows(2 * hidden, hidden).array() = dc.array() * i * (1.0 - g * g);
  dz.bottomRows(hidden).array() = dh.array() * s.tanh_c.array() * o * (1.0 - o);
  return dz;
}

}  // namespace

LstmLayerParams LstmLayerParams::zeros(Index input_size, Index hidden_size) {
  if (input_size < 1 || hidden_size < 1) throw InvalidArgument("layer sizes must be positive");
  return {MatrixXd::Zero(4 * hidden_size, input_size), MatrixXd::Zero(4 * hidden_size, hidden_size),
          VectorXd::Zero(4 * hidden_size)};
}

Seq2SeqParams Seq2SeqParams::zeros(Index hidden_size) {
  return {LstmLayerParams::zeros(kFeatureSize, hidden_size),
          LstmLayerParams::zeros(hidden_size, hidden_size),
          {MatrixXd::Zero(kFeatureSize, hidden_size), VectorXd::Zero(kFeatureSize)}};
}

std::size_t Seq2SeqParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& a : arrays()) n += a.size();
  return n;
}

std::array<std::span<double>, 8> Seq2SeqParams::arrays() {
  auto view = [](auto& m) { return std::span<double>(m.data(), static_cast<std::size_t>(m.size())); };
  return {view(encoder.w_ih), view(encoder.w_hh), view(encoder.bias),
          view(decoder.w_ih), view(decoder.w_hh), view(decoder.bias),
          view(readout.weight), view(readout.bias)};
}

std::array<std::span<const double>, 8> Seq2SeqParams::arrays() const {
  auto view = [](const auto& m) {
    return std::span<const double>(m.data(), static_cast<std::size_t>(m.size()));
  };
  return {view(encoder.w_ih), view(encoder.w_hh), view(encoder.bias),
          view(decoder.w_ih), view(decoder.w_hh), view(decoder.bias),
          view(readout.weight), view(readout.bias)};
}

bool Seq2SeqParams::all_finite() const {
  for (const auto& a : arrays()) {
    for (double v : a) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void Seq2SeqParams::check_shapes() const {
  const Index h = hidden_size();
  const bool ok = h >= 1 && encoder.w_ih.rows() == 4 * h && encoder.w_ih.cols() == kFeatureSize &&
                  encoder.w_hh.rows() == 4 * h && encoder.bias.size() == 4 * h &&
                  decoder.w_ih.rows() == 4 * h && decoder.w_ih.cols() == h &&
                  decoder.w_hh.rows() == 4 * h && decoder.w_hh.cols() == h &&
                  decoder.bias.size() == 4 * h && readout.weight.rows() == kFeatureSize &&
                  readout.weight.cols() == h && readout.bias.size() == kFeatureSize;
  if (!ok) throw InvalidArgument("inconsistent seq2seq parameter shapes");
}

void NormalizationSpec::validate() const {
  for (double s : {x_scale, y_scale, dt_scale}) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("normalisation scales must be positive");
  }
}

Seq2SeqModel Seq2SeqModel::zeros(Index hidden_size) {
  Seq2SeqModel model;
  model.params = Seq2SeqParams::zeros(hidden_size);
  model.optimizer = {0, model.params.zeros_like(), model.params.zeros_like()};
  return model;
}

Seq2SeqModel Seq2SeqModel::initialized(std::uint64_t seed, Index hidden_size) {
  Seq2SeqModel model = zeros(hidden_size);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto a : model.params.arrays()) {
    for (double& v : a) v = dist(rng);
  }
  model.params.encoder.bias.segment(hidden_size, hidden_size).setOnes();
  model.params.decoder.bias.segment(hidden_size, hidden_size).setOnes();
  return model;
}

CellOutput lstm_cell_forward(const LstmLayerParams& params, const VectorXd& input,
                             const VectorXd& h, const VectorXd& c) {
  const Index hidden = params.hidden_size();
  if (input.size() != params.input_size() || h.size() != hidden || c.size() != hidden ||
      params.w_ih.rows() != 4 * hidden || params.bias.size() != 4 * hidden) {
    throw InvalidArgument("lstm_cell_forward: dimension mismatch");
  }
  require_finite(input, "cell input");
  require_finite(h, "hidden state");
  require_finite(c, "cell state");
  MatrixXd pre = params.w_ih * input;
  pre.colwise() += params.bias;
  StepTrace s = cell_step(params, std::move(pre), h, c);
  CellOutput out;
  out.h = s.h.col(0);
  out.c = s.c.col(0);
  out.cache = {input, h, c, s.gates.col(0), out.c, s.tanh_c.col(0)};
  return out;
}

RecurrentState encode(const Seq2SeqParams& params, const Matrix3Xd& input) {
  check_sequence(input, "input sequence");
  const Index hidden = params.hidden_size();
  RecurrentState state{VectorXd::Zero(hidden), VectorXd::Zero(hidden)};
  for (Index t = 0; t < input.cols(); ++t) {
    CellOutput step = lstm_cell_forward(params.encoder, input.col(t), state.h, state.c);
    state = {std::move(step.h), std::move(step.c)};
  }
  return state;
}

Matrix3Xd decode(const Seq2SeqParams& params, const RecurrentState& state, Index w_out) {
  if (w_out < 1) throw InvalidArgument("w_out must be at least 1");
  Matrix3Xd out(kFeatureSize, w_out);
  RecurrentState s = state;
  for (Index k = 0; k < w_out; ++k) {
    CellOutput step = lstm_cell_forward(params.decoder, state.h, s.h, s.c);
    s = {std::move(step.h), std::move(step.c)};
    out.col(k) = params.readout.weight * s.h + params.readout.bias;
  }
  return out;
}

Matrix3Xd forward(const Seq2SeqParams& params, const Matrix3Xd& input, Index w_out) {
  return decode(params, encode(params, input), w_out);
}

std::vector<Matrix3Xd> forward_batch(const Seq2SeqParams& params,
                                     std::span<const Matrix3Xd> inputs, Index w_out) {
  const auto steps = forward_impl(params, inputs, w_out, nullptr);
  std::vector<Matrix3Xd> out(inputs.size(), Matrix3Xd(kFeatureSize, w_out));
  for (Index k = 0; k < w_out; ++k) {
    const MatrixXd& y = steps[static_cast<std::size_t>(k)];
    for (std::size_t b = 0; b < out.size(); ++b) out[b].col(k) = y.col(static_cast<Index>(b));
  }
  return out;
}

double mse_loss(const Matrix3Xd& prediction, const Matrix3Xd& target) {
  if (prediction.cols() != target.cols()) throw InvalidArgument("mse_loss: shape mismatch");
  if (prediction.cols() == 0) throw InvalidArgument("mse_loss: empty sequences");
  return (prediction - target).squaredNorm() / static_cast<double>(prediction.size());
}

Gradients backward(const Seq2SeqParams& params, std::span<const Matrix3Xd> inputs,
                   std::span<const Matrix3Xd> targets) {
  if (inputs.size() != targets.size()) throw InvalidArgument("backward: batch size mismatch");
  if (targets.empty()) throw InvalidArgument("backward: empty batch");
  const Index w_out = targets.front().cols();
  for (const auto& t : targets) {
    check_sequence(t, "target sequence");
    if (t.cols() != w_out) throw InvalidArgument("backward: target lengths differ");
  }

  BatchTrace trace;
  const auto outputs = forward_impl(params, inputs, w_out, &trace);
  const Index batch = static_cast<Index>(inputs.size());
  const Index hidden = params.hidden_size();
  const Index w_in = inputs.front().cols();
  const double scale = 1.0 / static_cast<double>(kFeatureSize * w_out * batch);

  Gradients result;
  result.grads = params.zeros_like();
  auto& g = result.grads;

  MatrixXd dy(kFeatureSize, batch);
  double loss_sum = 0.0;
  std::vector<MatrixXd> dys;
  dys.reserve(static_cast<std::size_t>(w_out));
  for (Index k = 0; k < w_out; ++k) {
    for (Index b = 0; b < batch; ++b) {
      dy.col(b) = outputs[static_cast<std::size_t>(k)].col(b) -
                  targets[static_cast<std::size_t>(b)].col(k);
    }
    loss_sum += dy.squaredNorm();
    dys.push_back(2.0 * scale * dy);
  }
  result.loss = loss_sum * scale;

  const MatrixXd& h_enc = trace.enc.back().h;
  const MatrixXd& c_enc = trace.enc.back().c;

  // Decoder, newest step first.
  MatrixXd dh_next = MatrixXd::Zero(hidden, batch);
  MatrixXd dc_next = MatrixXd::Zero(hidden, batch);
  MatrixXd dz_sum = MatrixXd::Zero(4 * hidden, batch);
  for (Index k = w_out - 1; k >= 0; --k) {
    const StepTrace& s = trace.dec[static_cast<std::size_t>(k)];
    const MatrixXd& h_prev = k > 0 ? trace.dec[static_cast<std::size_t>(k - 1)].h : h_enc;
    const MatrixXd& c_prev = k > 0 ? trace.dec[static_cast<std::size_t>(k - 1)].c : c_enc;
    const MatrixXd& dyk = dys[static_cast<std::size_t>(k)];

    g.readout.weight.noalias() += dyk * s.h.transpose();
    g.readout.bias += dyk.rowwise().sum();
    MatrixXd dh = params.readout.weight.transpose() * dyk + dh_next;
    const auto o = s.gates.bottomRows(hidden).array();
    MatrixXd dc =
        dc_next + (dh.array() * o * (1.0 - s.tanh_c.array().square())).matrix();
    MatrixXd dz = gate_grads(s, dh, dc, c_prev, hidden);

    g.decoder.w_hh.noalias() += dz * h_prev.transpose();
    dz_sum += dz;
    dh_next.noalias() = params.decoder.w_hh.transpose() * dz;
    dc_next = dc.cwiseProduct(s.gates.middleRows(hidden, hidden));
  }
  g.decoder.w_ih.noalias() += dz_sum * h_enc.transpose();
  g.decoder.bias += dz_sum.rowwise().sum();

  // Encoder final state feeds both the decoder's initial state and its input.
  MatrixXd dh_carry = dh_next;
  dh_carry.noalias() += params.decoder.w_ih.transpose() * dz_sum;
  MatrixXd dc_carry = dc_next;

  for (Index t = w_in - 1; t >= 0; --t) {
    const StepTrace& s = trace.enc[static_cast<std::size_t>(t)];
    const MatrixXd h_prev =
        t > 0 ? trace.enc[static_cast<std::size_t>(t - 1)].h : MatrixXd::Zero(hidden, batch);
    const MatrixXd c_prev =
        t > 0 ? trace.enc[static_cast<std::size_t>(t - 1)].c : MatrixXd::Zero(hidden, batch);
    const auto o = s.gates.bottomRows(hidden).array();
    MatrixXd dc =
        dc_carry + (dh_carry.array() * o * (1.0 - s.tanh_c.array().square())).matrix();
    MatrixXd dz = gate_grads(s, dh_carry, dc, c_prev, hidden);

    g.encoder.w_ih.noalias() += dz * trace.enc_inputs[static_cast<std::size_t>(t)].transpose();
    if (t > 0) g.encoder.w_hh.noalias() += dz * h_prev.transpose();
    g.encoder.bias += dz.rowwise().sum();
    dh_carry.noalias() = params.encoder.w_hh.transpose() * dz;
    dc_carry = dc.cwiseProduct(s.gates.middleRows(hidden, hidden));
  }
  return result;
}

Gradients backward(const Seq2SeqParams& params, const Matrix3Xd& input, const Matrix3Xd& target) {
  return backward(params, std::span<const Matrix3Xd>(&input, 1),
                  std::span<const Matrix3Xd>(&target, 1));
}

}  // namespace evtraj
