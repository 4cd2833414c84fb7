#pragma once

#include <cstdint>
#include <random>

namespace pmarl {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named sub-stream (SplitMix64 mix of the
/// base seed and the stream id), so per-agent and per-component streams
/// never overlap for different ids.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

inline Rng make_rng(std::uint64_t base, std::uint64_t stream) {
  return Rng(derive_seed(base, stream));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace pmarl
