#pragma once

#include <cstdint>

namespace evtraj {

// SplitMix64 finaliser; decorrelates derived seeds.
constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for an independent random stream `stream` (and optional sub-index)
/// derived from one global seed.
constexpr std::uint64_t derive_seed(std::uint64_t global, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(global) ^ stream) ^ index);
}

// Stream identifiers used across the pipeline.
namespace seed_stream {
inline constexpr std::uint64_t kSimulator = 1;
inline constexpr std::uint64_t kSplits = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kShuffle = 4;
inline constexpr std::uint64_t kLaunch = 5;
}  // namespace seed_stream

}  // namespace evtraj
