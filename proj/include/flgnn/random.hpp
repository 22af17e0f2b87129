#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace flgnn {

using Rng = std::mt19937_64;

// Derives an independent seed for a named stream ("split", "init", "dp", ...)
// from the master seed, so that enabling one consumer of randomness never
// shifts the draws seen by another.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace flgnn
