#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "evtraj/seq2seq.hpp"

namespace evtraj {

/// S2S1 checkpoint: magic "S2S1", u32 input size, u32 hidden size, u32 output
/// size, u64 Adam step, then row-major little-endian f64 arrays for the
/// parameters in declared order, followed by the Adam first and second
/// moments in the same order.
void write_checkpoint(std::ostream& out, const Seq2SeqModel& model);
Seq2SeqModel read_checkpoint(std::istream& in);

/// Training context stored in the JSON sidecar next to a checkpoint.
struct CheckpointMeta {
  TrainConfig train;
  Index w_in = 20;
  Index w_out = 45;
  std::string strategy;  // e.g. "spatial:2px"
  std::uint64_t seed = 0;
};

/// Writes `<path>` (binary) and `<path>.json` (config + normalisation).
void save_model(const std::filesystem::path& path, const Seq2SeqModel& model,
                const CheckpointMeta& meta);

struct LoadedModel {
  Seq2SeqModel model;
  CheckpointMeta meta;
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace evtraj
