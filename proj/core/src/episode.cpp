#include "edgemig/episode.hpp"

namespace edgemig {

std::vector<EpisodeSpec> evaluation_episodes(std::span<const SlotTrace> traces,
                                             std::uint64_t seed, int seeds_per_trace) {
  std::vector<EpisodeSpec> out;
  out.reserve(traces.size() * static_cast<std::size_t>(seeds_per_trace));
  for (std::size_t i = 0; i < traces.size(); ++i)
    for (int k = 0; k < seeds_per_trace; ++k)
      out.push_back({&traces[i], derive_seed(seed, StreamPurpose::EpisodeSampler, i,
                                             0x8000'0000ull + static_cast<std::uint64_t>(k))});
  return out;
}

}  // namespace edgemig
