#include "evtraj/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "evtraj/error.hpp"

namespace evtraj {
namespace {

using nlohmann::json;

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), 8);
  if (in.gcount() != 8) throw FormatError("truncated S2S1 checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (in.gcount() != 4) throw FormatError("truncated S2S1 checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

template <typename Derived>
void put_matrix(std::ostream& out, const Eigen::MatrixBase<Derived>& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) put_u64(out, std::bit_cast<std::uint64_t>(m(r, c)));
  }
}

template <typename Derived>
void get_matrix(std::istream& in, Eigen::MatrixBase<Derived>& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = std::bit_cast<double>(get_u64(in));
  }
}

void put_params(std::ostream& out, const Seq2SeqParams& p) {
  for (const auto* layer : {&p.encoder, &p.decoder}) {
    put_matrix(out, layer->w_ih);
    put_matrix(out, layer->w_hh);
    put_matrix(out, layer->bias);
  }
  put_matrix(out, p.readout.weight);
  put_matrix(out, p.readout.bias);
}

void get_params(std::istream& in, Seq2SeqParams& p) {
  for (auto* layer : {&p.encoder, &p.decoder}) {
    get_matrix(in, layer->w_ih);
    get_matrix(in, layer->w_hh);
    get_matrix(in, layer->bias);
  }
  get_matrix(in, p.readout.weight);
  get_matrix(in, p.readout.bias);
}

json meta_to_json(const Seq2SeqModel& model, const CheckpointMeta& meta) {
  const auto& n = model.normalization;
  const auto& t = meta.train;
  return json{
      {"format", "S2S1"},
      {"input_size", kFeatureSize},
      {"hidden_size", model.params.hidden_size()},
      {"output_size", kFeatureSize},
      {"w_in", meta.w_in},
      {"w_out", meta.w_out},
      {"strategy", meta.strategy},
      {"seed", meta.seed},
      {"normalization", {{"x_scale", n.x_scale}, {"y_scale", n.y_scale}, {"dt_scale_per_ms", n.dt_scale}}},
      {"train",
       {{"learning_rate", t.adam.learning_rate},
        {"beta1", t.adam.beta1},
        {"beta2", t.adam.beta2},
        {"epsilon", t.adam.epsilon},
        {"epochs", t.epochs},
        {"batch_size", t.batch_size},
        {"seed", t.seed}}},
  };
}

}  // namespace

void write_checkpoint(std::ostream& out, const Seq2SeqModel& model) {
  model.params.check_shapes();
  out.write("S2S1", 4);
  put_u32(out, static_cast<std::uint32_t>(kFeatureSize));
  put_u32(out, static_cast<std::uint32_t>(model.params.hidden_size()));
  put_u32(out, static_cast<std::uint32_t>(kFeatureSize));
  put_u64(out, model.optimizer.step);
  put_params(out, model.params);
  put_params(out, model.optimizer.m);
  put_params(out, model.optimizer.v);
  if (!out) throw IoError("failed writing checkpoint");
}

Seq2SeqModel read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (in.gcount() != 4 || std::string_view(magic.data(), 4) != "S2S1") {
    throw FormatError("bad checkpoint magic, expected S2S1");
  }
  const auto input_size = get_u32(in);
  const auto hidden = get_u32(in);
  const auto output_size = get_u32(in);
  if (input_size != kFeatureSize || output_size != kFeatureSize || hidden == 0 || hidden > 4096) {
    throw FormatError("unsupported checkpoint dimensions");
  }
  Seq2SeqModel model = Seq2SeqModel::zeros(static_cast<Index>(hidden));
  model.optimizer.step = get_u64(in);
  get_params(in, model.params);
  get_params(in, model.optimizer.m);
  get_params(in, model.optimizer.v);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in checkpoint");
  return model;
}

void save_model(const std::filesystem::path& path, const Seq2SeqModel& model,
                const CheckpointMeta& meta) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_checkpoint(out, model);
  }
  std::ofstream side(path.string() + ".json", std::ios::trunc);
  if (!side) throw IoError("cannot write checkpoint sidecar for '" + path.string() + "'");
  side << meta_to_json(model, meta).dump(2) << '\n';
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  LoadedModel loaded{read_checkpoint(in), {}};

  std::ifstream side(path.string() + ".json");
  if (!side) throw IoError("missing checkpoint sidecar '" + path.string() + ".json'");
  try {
    const json j = json::parse(side);
    if (j.at("hidden_size").get<Index>() != loaded.model.params.hidden_size()) {
      throw FormatError("sidecar hidden_size does not match checkpoint");
    }
    auto& n = loaded.model.normalization;
    n.x_scale = j.at("normalization").at("x_scale").get<double>();
    n.y_scale = j.at("normalization").at("y_scale").get<double>();
    n.dt_scale = j.at("normalization").at("dt_scale_per_ms").get<double>();
    n.validate();
    auto& m = loaded.meta;
    m.w_in = j.at("w_in").get<Index>();
    m.w_out = j.at("w_out").get<Index>();
    m.strategy = j.at("strategy").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& t = j.at("train");
    m.train.adam.learning_rate = t.at("learning_rate").get<double>();
    m.train.adam.beta1 = t.at("beta1").get<double>();
    m.train.adam.beta2 = t.at("beta2").get<double>();
    m.train.adam.epsilon = t.at("epsilon").get<double>();
    m.train.epochs = t.at("epochs").get<int>();
    m.train.batch_size = t.at("batch_size").get<std::size_t>();
    m.train.seed = t.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint sidecar: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid checkpoint sidecar: ") + e.what());
  }
  return loaded;
}

}  // namespace evtraj
