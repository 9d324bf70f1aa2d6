#pragma once

#include <span>
#include <vector>

#include "edgemig/env.hpp"
#include "edgemig/topology.hpp"

namespace edgemig::agents {

/// Full-information transition costs, seconds: at(t, prev, a) is the cost of
/// serving slot t from `a` when slot t-1 was served from `prev`.
struct CostTensor {
  int horizon = 0;
  int servers = 0;
  ServerId a_init;
  std::vector<double> step_cost;  // [t][prev][a]

  double at(int t, int prev, int a) const {
    return step_cost[(static_cast<std::size_t>(t) * static_cast<std::size_t>(servers) +
                      static_cast<std::size_t>(prev)) *
                         static_cast<std::size_t>(servers) +
                     static_cast<std::size_t>(a)];
  }
  double& at(int t, int prev, int a) {
    return step_cost[(static_cast<std::size_t>(t) * static_cast<std::size_t>(servers) +
                      static_cast<std::size_t>(prev)) *
                         static_cast<std::size_t>(servers) +
                     static_cast<std::size_t>(a)];
  }
};

CostTensor build_cost_tensor(const OracleSnapshot& snap, const GridSpec& grid, const EnvConfig& cfg);

struct OptimResult {
  std::vector<ServerId> actions;
  double total = 0.0;
};

/// Shortest path through the layered (slot, server) graph. Ties go to the
/// lowest server index.
OptimResult optim_solve(const CostTensor& ct);

/// Total cost of a given action sequence starting from a_init.
double sequence_cost(const CostTensor& ct, std::span<const ServerId> actions);

}  // namespace edgemig::agents
