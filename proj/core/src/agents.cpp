#include "edgemig/agents.hpp"

#include <cmath>
#include <random>

#include "edgemig/error.hpp"

namespace edgemig::agents {

AgentDecision NeverMigrate::act(const Observation&, int) {
  if (!home_) throw Error(Errc::NotInitialized, "NM used before init");
  return {*home_, {}, std::nullopt};
}

AgentDecision AlwaysMigrate::act(const Observation& obs, int) { return {obs.u, {}, std::nullopt}; }

ThompsonBandit::ThompsonBandit(int arms, std::uint64_t seed, double prior_mean, double prior_variance,
                               double obs_variance)
    : post_(static_cast<std::size_t>(arms), ArmPosterior{prior_mean, prior_variance}),
      obs_variance_(obs_variance),
      rng_(make_stream(seed, StreamPurpose::Bandit)) {
  if (arms < 1) throw Error(Errc::ConfigInvalid, "bandit needs at least one arm");
  if (!(prior_variance > 0.0) || !(obs_variance > 0.0))
    throw Error(Errc::ConfigInvalid, "bandit variances must be positive");
}

const ArmPosterior& ThompsonBandit::posterior(int arm) const {
  if (arm < 0 || arm >= arms()) throw Error(Errc::UnknownArm, "arm " + std::to_string(arm));
  return post_[static_cast<std::size_t>(arm)];
}

int ThompsonBandit::select(std::vector<double>* samples) {
  std::normal_distribution<double> z(0.0, 1.0);
  int best = 0;
  double best_v = 0.0;
  if (samples) samples->assign(post_.size(), 0.0);
  for (std::size_t k = 0; k < post_.size(); ++k) {
    const double theta = post_[k].mean + std::sqrt(post_[k].variance) * z(rng_);
    if (samples) (*samples)[k] = theta;
    if (k == 0 || theta < best_v) {
      best_v = theta;
      best = static_cast<int>(k);
    }
  }
  return best;
}

void ThompsonBandit::update(int arm, double cost) {
  if (arm < 0 || arm >= arms()) throw Error(Errc::UnknownArm, "arm " + std::to_string(arm));
  ++n_;
  mean_cost_ += (cost - mean_cost_) / static_cast<double>(n_);
  const double scale = std::abs(mean_cost_) > 1e-12 ? mean_cost_ * mean_cost_ : 1.0;
  const double noise = obs_variance_ * scale;
  ArmPosterior& p = post_[static_cast<std::size_t>(arm)];
  const double var = 1.0 / (1.0 / p.variance + 1.0 / noise);
  p.mean = var * (p.mean / p.variance + cost / noise);
  p.variance = var;
}

AgentDecision Mabts::act(const Observation&, int) {
  AgentDecision d;
  last_ = bandit_.select(&d.values);
  d.action = ServerId(*last_);
  return d;
}

void Mabts::observe(double, const CostBreakdown& cost) {
  if (last_) bandit_.update(*last_, cost.total());
  last_.reset();
}

void Optim::init(const EpisodeContext& ctx) {
  if (!ctx.oracle || !ctx.grid || !ctx.env)
    throw Error(Errc::NotInitialized, "OPTIM needs the episode's oracle snapshot");
  plan_ = optim_solve(build_cost_tensor(*ctx.oracle, *ctx.grid, *ctx.env));
}

AgentDecision Optim::act(const Observation&, int t) {
  if (t < 0 || t >= static_cast<int>(plan_.actions.size()))
    throw Error(Errc::NotInitialized, "OPTIM has no plan for slot " + std::to_string(t));
  return {plan_.actions[static_cast<std::size_t>(t)], {}, std::nullopt};
}

EpisodeResult run_episode(Agent& agent, const World& world, const EpisodeSpec& spec) {
  Env env(world.grid, world.env);
  Observation obs = env.reset(*spec.trace, spec.seed);
  EpisodeContext ctx{&world.grid, &world.env, obs.u, agent.needs_oracle() ? &env.snapshot() : nullptr};
  agent.init(ctx);
  EpisodeResult res;
  res.snapshot_digest = snapshot_digest(env.snapshot());
  int t = 0;
  while (!env.done()) {
    const AgentDecision d = agent.act(obs, t);
    const StepOutcome so = env.step(d.action);
    agent.observe(so.reward, so.breakdown);
    res.actions.push_back(d.action);
    res.costs.push_back(so.breakdown);
    res.total_breakdown += so.breakdown;
    res.total_latency += so.breakdown.total();
    res.total_reward += so.reward;
    obs = so.obs;
    ++t;
  }
  agent.end_episode();
  return res;
}

}  // namespace edgemig::agents
