#pragma once

#include <cstdint>
#include <random>

namespace wsconf {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under master seed `seed`. Streams for distinct
/// (seed, index) pairs are independent for practical purposes, so record i of
/// a dataset can be generated without touching records 0..i-1.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(derive_seed(seed, index));
}

/// Uniform draw in [0, 1) from a stream, independent of libstdc++'s
/// generate_canonical so the value is reproducible across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace wsconf
