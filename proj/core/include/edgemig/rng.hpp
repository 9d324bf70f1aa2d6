#pragma once

#include <cstdint>
#include <random>

namespace edgemig {

using Rng = std::mt19937_64;

/// What a random stream is used for. Part of the stream key, so two purposes
/// never share draws even under the same seed.
enum class StreamPurpose : std::uint32_t {
  UserTasks = 1,
  ServerRate = 2,
  ServerLoad = 3,
  MigrationCoeff = 4,
  SyntheticTrace = 5,
  Policy = 6,
  Shuffle = 7,
  EpisodeSampler = 8,
  ParamInit = 9,
  Bandit = 10,
  Check = 11,
};

/// Independent engine keyed by (seed, purpose, index, sub). The key goes
/// through std::seed_seq so neighbouring keys give unrelated streams.
inline Rng make_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0,
                       std::uint64_t sub = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),        static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose),     static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), static_cast<std::uint32_t>(sub),
                    static_cast<std::uint32_t>(sub >> 32)};
  return Rng(seq);
}

/// Derives a child seed; used to hand out per-episode seeds from a run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index,
                                 std::uint64_t sub = 0) {
  Rng r = make_stream(seed, purpose, index, sub);
  return r();
}

inline double uniform(Rng& rng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int poisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<int>(mean)(rng);
}

}  // namespace edgemig
