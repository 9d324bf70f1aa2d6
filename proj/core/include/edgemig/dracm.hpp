#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "edgemig/agent.hpp"
#include "edgemig/encoder.hpp"
#include "edgemig/episode.hpp"
#include "edgemig/tensor.hpp"

namespace edgemig::dracm {

struct TrainerConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_eps = 0.2;
  double entropy_coef = 0.01;
  double learning_rate = 5e-4;
  int episodes_per_iteration = 16;
  int update_epochs = 8;
  int minibatch_trajectories = 4;
  int iterations = 100;
  bool normalize_advantages = true;

  void validate() const;
};

/// Encoder (shared server embedding + LSTM) with actor and critic heads.
class DracmNet {
 public:
  DracmNet(NetShape shape, std::uint64_t seed);

  NetShape shape;
  nn::ParamStore params;
  EncoderIds enc;
  HeadIds actor;
  HeadIds critic;
};

struct PolicyOutput {
  int action = 0;
  double log_prob = 0.0;
  double entropy = 0.0;
  std::vector<double> probs;
};

/// Samples from pi(.|h) when `rng` is given, otherwise takes the argmax.
PolicyOutput act(const DracmNet& net, const Mat& h, Rng* rng);
double value(const DracmNet& net, const Mat& h);
/// h_0..h_{T-1} for one sequence, one row per step.
Mat encode(const DracmNet& net, const std::vector<StepFeatures>& steps);

struct TrajectoryStep {
  StepFeatures x;
  int action = 0;
  double behavior_log_prob = std::numeric_limits<double>::quiet_NaN();
  double reward = 0.0;  // scaled
  CostBreakdown cost;   // raw seconds
};

struct Trajectory {
  std::string trace_id;
  std::uint64_t seed = 0;
  std::vector<TrajectoryStep> steps;
  std::vector<StepFeatures> features;  // steps[t].x, contiguous for the encoder
  double episode_return = 0.0;         // G_0 on scaled rewards
  double total_latency = 0.0;          // raw seconds
  CostBreakdown breakdown;

  void push(TrajectoryStep s, double gamma);
};

Trajectory rollout(const DracmNet& net, const World& world, const EpisodeSpec& spec, Rng* rng,
                   double gamma);

struct Gae {
  std::vector<double> advantages;
  std::vector<double> deltas;
};

/// `values` has one more entry than `rewards` (the terminal bootstrap).
Gae compute_gae(std::span<const double> rewards, std::span<const double> values, double gamma,
                double lambda);

double clipped_surrogate(double ratio, double advantage, double eps) noexcept;

struct LossTerms {
  double surrogate = 0.0;        // mean clipped surrogate
  double entropy = 0.0;          // mean policy entropy
  double actor_objective = 0.0;  // surrogate + c_h * entropy (maximised)
  double critic_loss = 0.0;      // mean squared one-step TD error
  double total = 0.0;            // critic_loss - actor_objective (minimised)
};

/// Losses for a minibatch of whole trajectories under the current
/// parameters. `advantages[b][t]` are frozen inputs. With `with_grad`, the
/// gradient of `total` is accumulated into net.params.
LossTerms dracm_loss(DracmNet& net, std::span<const Trajectory* const> batch,
                     std::span<const std::vector<double>* const> advantages,
                     const TrainerConfig& cfg, bool with_grad);

/// Log-probabilities of the recorded actions under the current parameters,
/// computed through the same batched path as dracm_loss.
std::vector<std::vector<double>> policy_log_probs(const DracmNet& net,
                                                  std::span<const Trajectory* const> batch);

struct IterationReport {
  long iteration = 0;
  double mean_latency_s = 0.0;
  double mean_return = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double wall_s = 0.0;
  std::vector<std::uint64_t> advantage_digests;  // one per update epoch
  std::vector<Trajectory> trajectories;
};

struct EvalReport {
  std::vector<double> episode_latency;
  double mean_latency_s = 0.0;
  double std_latency_s = 0.0;
  CostBreakdown mean_breakdown;
};

EvalReport summarize(std::span<const double> latencies, std::span<const CostBreakdown> breakdowns);

class Trainer {
 public:
  Trainer(World world, NetShape shape, TrainerConfig cfg, std::uint64_t seed);

  IterationReport train_iteration(const TraceSampler& sampler);
  /// Greedy rollouts; never touches the parameters.
  EvalReport evaluate(std::span<const EpisodeSpec> episodes) const;

  DracmNet& net() noexcept { return net_; }
  const DracmNet& net() const noexcept { return net_; }
  const TrainerConfig& config() const noexcept { return cfg_; }
  const World& world() const noexcept { return world_; }
  long iteration() const noexcept { return iteration_; }

 private:
  World world_;
  TrainerConfig cfg_;
  std::uint64_t seed_;
  DracmNet net_;
  DracmNet behavior_;
  nn::AdamState opt_;
  long iteration_ = 0;
};

/// Greedy deployment of a trained network behind the common agent interface.
class DracmAgent : public agents::Agent {
 public:
  explicit DracmAgent(const DracmNet& net) : net_(&net) {}

  std::string name() const override { return "DRACM"; }
  void init(const agents::EpisodeContext& ctx) override;
  agents::AgentDecision act(const Observation& obs, int t) override;

 private:
  const DracmNet* net_;
  EncoderCursor cursor_;
  ServerId prev_;
  bool ready_ = false;
};

}  // namespace edgemig::dracm
