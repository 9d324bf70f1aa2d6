#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgemig/agent.hpp"
#include "edgemig/dracm.hpp"

namespace edgemig::dqlm {

using dracm::Mat;
using dracm::NetShape;
using dracm::Trajectory;

/// Same encoder as DRACM with a Q-value head of width |M|.
class QNet {
 public:
  QNet(NetShape shape, std::uint64_t seed);

  NetShape shape;
  nn::ParamStore params;
  dracm::EncoderIds enc;
  dracm::HeadIds head;
};

Mat q_values(const QNet& net, const Mat& h);

/// Uniform action with probability epsilon, otherwise the first argmax.
int epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng);

/// Linear 1.0 -> 0.05 over the first half of `iterations`, flat afterwards.
double epsilon_at(long iteration, int iterations, double start = 1.0, double end = 0.05);

/// Mean squared TD error over whole trajectories; the last slot has no
/// successor. With `with_grad`, gradients are accumulated into `net` only.
double td_loss(QNet& net, const QNet& target, std::span<const Trajectory* const> batch, double gamma,
               bool with_grad);

Trajectory rollout(const QNet& net, const World& world, const EpisodeSpec& spec, double epsilon,
                   Rng& rng, double gamma);

struct DqlmReport {
  long iteration = 0;
  double mean_latency_s = 0.0;
  double td_loss = 0.0;
  double epsilon = 0.0;
  double wall_s = 0.0;
};

class Trainer {
 public:
  /// Reuses DRACM's episode/epoch/minibatch/learning-rate settings.
  Trainer(World world, NetShape shape, dracm::TrainerConfig cfg, std::uint64_t seed,
          int target_sync_epochs = 2);

  DqlmReport train_iteration(const TraceSampler& sampler);
  dracm::EvalReport evaluate(std::span<const EpisodeSpec> episodes) const;

  const QNet& net() const noexcept { return net_; }
  QNet& net() noexcept { return net_; }
  long iteration() const noexcept { return iteration_; }

 private:
  World world_;
  dracm::TrainerConfig cfg_;
  std::uint64_t seed_;
  int sync_every_;
  QNet net_;
  QNet target_;
  nn::AdamState opt_;
  long iteration_ = 0;
  long epochs_ = 0;
};

class DqlmAgent : public agents::Agent {
 public:
  DqlmAgent(const QNet& net, double epsilon, std::uint64_t seed);

  std::string name() const override { return "DQLM"; }
  void init(const agents::EpisodeContext& ctx) override;
  agents::AgentDecision act(const Observation& obs, int t) override;

 private:
  const QNet* net_;
  double epsilon_;
  Rng rng_;
  dracm::EncoderCursor cursor_;
  ServerId prev_;
  bool ready_ = false;
};

}  // namespace edgemig::dqlm
