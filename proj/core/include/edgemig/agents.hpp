#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgemig/agent.hpp"
#include "edgemig/optim.hpp"
#include "edgemig/rng.hpp"

namespace edgemig::agents {

/// Keeps the service where the episode started.
class NeverMigrate : public Agent {
 public:
  std::string name() const override { return "NM"; }
  void init(const EpisodeContext& ctx) override { home_ = ctx.initial_server; }
  AgentDecision act(const Observation& obs, int t) override;

 private:
  std::optional<ServerId> home_;
};

/// Follows the user to the local server every slot.
class AlwaysMigrate : public Agent {
 public:
  std::string name() const override { return "AM"; }
  void init(const EpisodeContext&) override {}
  AgentDecision act(const Observation& obs, int t) override;
};

struct ArmPosterior {
  double mean = 0.0;      // seconds
  double variance = 1e6;  // seconds^2
};

/// Context-free Gaussian Thompson sampling over servers, minimising cost.
/// Observation noise is sigma_obs^2 in units of the running mean cost, so
/// the posterior means stay in seconds while the noise level adapts to the
/// cost scale.
class ThompsonBandit {
 public:
  ThompsonBandit(int arms, std::uint64_t seed, double prior_mean = 0.0, double prior_variance = 1e6,
                 double obs_variance = 1.0);

  /// Draws one value per arm and returns the argmin (lowest index on ties).
  int select(std::vector<double>* samples = nullptr);
  void update(int arm, double cost);

  int arms() const noexcept { return static_cast<int>(post_.size()); }
  const ArmPosterior& posterior(int arm) const;
  double running_mean() const noexcept { return mean_cost_; }
  long updates() const noexcept { return n_; }

 private:
  std::vector<ArmPosterior> post_;
  double obs_variance_;
  double mean_cost_ = 0.0;
  long n_ = 0;
  Rng rng_;
};

/// Bandit behind the agent interface: arms are servers, the reward signal
/// is each slot's total latency. The posterior persists across episodes.
class Mabts : public Agent {
 public:
  Mabts(int servers, std::uint64_t seed) : bandit_(servers, seed) {}

  std::string name() const override { return "MABTS"; }
  void init(const EpisodeContext&) override { last_.reset(); }
  AgentDecision act(const Observation& obs, int t) override;
  void observe(double reward, const CostBreakdown& cost) override;

  ThompsonBandit& bandit() noexcept { return bandit_; }

 private:
  ThompsonBandit bandit_;
  std::optional<int> last_;
};

/// Offline optimum: solves the episode's cost tensor at init and replays it.
class Optim : public Agent {
 public:
  std::string name() const override { return "OPTIM"; }
  void init(const EpisodeContext& ctx) override;
  AgentDecision act(const Observation& obs, int t) override;
  bool needs_oracle() const override { return true; }

  const OptimResult& solution() const noexcept { return plan_; }

 private:
  OptimResult plan_;
};

}  // namespace edgemig::agents
