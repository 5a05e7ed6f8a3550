#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tagsiege {

/// Derives an independent 64-bit seed for a named substream of a run seed.
/// Every randomized component draws from its own label ("synth/edges",
/// "attack/prompt-order/17", ...) so adding a consumer never shifts the others.
std::uint64_t substream_seed(std::uint64_t run_seed, std::string_view label);

inline std::mt19937_64 substream(std::uint64_t run_seed, std::string_view label) {
  return std::mt19937_64(substream_seed(run_seed, label));
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection; bound must be > 0.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound);

/// 64-bit FNV-1a, used for config hashes and substream labels.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace tagsiege
