#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "edgemig/env.hpp"
#include "edgemig/rng.hpp"
#include "edgemig/topology.hpp"
#include "edgemig/traces.hpp"

namespace edgemig {

/// The fixed part of an experiment: geometry plus environment parameters.
struct World {
  GridSpec grid;
  EnvConfig env;
};

/// One episode is fully determined by a trace and an exogenous seed.
struct EpisodeSpec {
  const SlotTrace* trace = nullptr;
  std::uint64_t seed = 0;
};

/// Picks training episodes: trace uniformly from the pool, seed derived from
/// (run seed, iteration, episode).
class TraceSampler {
 public:
  TraceSampler(std::span<const SlotTrace> pool, std::uint64_t seed) : pool_(pool), seed_(seed) {}

  EpisodeSpec operator()(long iteration, int episode) const {
    Rng rng = make_stream(seed_, StreamPurpose::EpisodeSampler, static_cast<std::uint64_t>(iteration),
                          static_cast<std::uint64_t>(episode));
    std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
    const std::size_t k = pick(rng);
    return {&pool_[k], rng()};
  }

  std::size_t size() const noexcept { return pool_.size(); }

 private:
  std::span<const SlotTrace> pool_;
  std::uint64_t seed_;
};

/// Evaluation episodes: every trace crossed with `seeds_per_trace` seeds.
std::vector<EpisodeSpec> evaluation_episodes(std::span<const SlotTrace> traces,
                                             std::uint64_t seed, int seeds_per_trace = 1);

}  // namespace edgemig
