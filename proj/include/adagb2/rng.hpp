#pragma once

#include <cstdint>
#include <random>

namespace adagb2 {

/// SplitMix64 finalizer; used to derive independent engine seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ (b + 0x632be59bd9b4e019ULL)); }

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t salt) {
  return std::mt19937_64(combine_seed(seed, salt));
}

/// One engine per (experiment seed, replication, iteration). Draws therefore do
/// not depend on the order in which replications are scheduled.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t replication, std::uint64_t iteration) {
  return std::mt19937_64(combine_seed(combine_seed(seed, replication), iteration));
}

}  // namespace adagb2
