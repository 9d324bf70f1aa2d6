#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgemig/env.hpp"
#include "edgemig/episode.hpp"

namespace edgemig::agents {

struct EpisodeContext {
  const GridSpec* grid = nullptr;
  const EnvConfig* env = nullptr;
  ServerId initial_server;  // u_0, also the initial serving node
  /// Only the offline optimum reads this.
  const OracleSnapshot* oracle = nullptr;
};

struct AgentDecision {
  ServerId action;
  std::vector<double> values;  // sampled arm values or Q-values, when the agent has them
  std::optional<double> epsilon;
};

/// Uniform driving interface: init once per episode, then act/observe per
/// slot, then end_episode.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string name() const = 0;
  virtual void init(const EpisodeContext& ctx) = 0;
  virtual AgentDecision act(const Observation& obs, int t) = 0;
  virtual void observe(double /*reward*/, const CostBreakdown& /*cost*/) {}
  virtual void end_episode() {}
  virtual bool needs_oracle() const { return false; }
};

struct EpisodeResult {
  std::vector<ServerId> actions;
  std::vector<CostBreakdown> costs;
  CostBreakdown total_breakdown;
  double total_latency = 0.0;
  double total_reward = 0.0;
  std::uint64_t snapshot_digest = 0;
};

/// Plays one full episode of `agent` in a fresh environment.
EpisodeResult run_episode(Agent& agent, const World& world, const EpisodeSpec& spec);

}  // namespace edgemig::agents
