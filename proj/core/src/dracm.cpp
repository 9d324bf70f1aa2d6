#include "edgemig/dracm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "edgemig/error.hpp"

namespace edgemig::dracm {

using Index = Eigen::Index;

void TrainerConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(Errc::ConfigInvalid, "gamma must be in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(Errc::ConfigInvalid, "lambda must be in [0, 1]");
  if (!(clip_eps > 0.0)) throw Error(Errc::ConfigInvalid, "clip epsilon must be positive");
  if (!(entropy_coef >= 0.0)) throw Error(Errc::ConfigInvalid, "entropy coefficient must be >= 0");
  if (!(learning_rate >= 0.0)) throw Error(Errc::ConfigInvalid, "learning rate must be >= 0");
  if (episodes_per_iteration < 1 || update_epochs < 0 || minibatch_trajectories < 1 || iterations < 0)
    throw Error(Errc::ConfigInvalid, "episode/epoch/minibatch counts must be positive");
}

DracmNet::DracmNet(NetShape s, std::uint64_t seed) : shape(s) {
  if (s.servers < 1 || s.embed_dim < 1 || s.lstm_hidden < 1 || s.head_hidden < 1)
    throw Error(Errc::ConfigInvalid, "network sizes must be positive");
  enc = add_encoder(params, shape, "enc");
  actor = add_head(params, "actor", shape.lstm_hidden, shape.head_hidden, shape.servers);
  critic = add_head(params, "critic", shape.lstm_hidden, shape.head_hidden, 1);
  Rng rng = make_stream(seed, StreamPurpose::ParamInit);
  init_encoder(params, enc, rng);
  init_head(params, actor, rng);
  init_head(params, critic, rng);
}

PolicyOutput act(const DracmNet& net, const Mat& h, Rng* rng) {
  const HeadPass p = head_forward(net.params, net.actor, h);
  const std::span<const double> logits(p.out.data(), static_cast<std::size_t>(p.out.cols()));
  nn::Categorical cat = nn::softmax_categorical(logits, rng);
  PolicyOutput out;
  out.entropy = cat.entropy;
  if (rng) {
    out.action = cat.sample;
    out.log_prob = cat.log_prob;
  } else {
    out.action = nn::argmax(logits);
    out.log_prob = std::log(cat.probs[static_cast<std::size_t>(out.action)]);
  }
  out.probs = std::move(cat.probs);
  return out;
}

double value(const DracmNet& net, const Mat& h) {
  return head_forward(net.params, net.critic, h).out(0, 0);
}

Mat encode(const DracmNet& net, const std::vector<StepFeatures>& steps) {
  const std::vector<StepFeatures>* seq[1] = {&steps};
  return encode_batch(net.params, net.enc, seq).h();
}

void Trajectory::push(TrajectoryStep s, double gamma) {
  episode_return += std::pow(gamma, static_cast<double>(steps.size())) * s.reward;
  total_latency += s.cost.total();
  breakdown += s.cost;
  features.push_back(s.x);
  steps.push_back(s);
}

Trajectory rollout(const DracmNet& net, const World& world, const EpisodeSpec& spec, Rng* rng,
                   double gamma) {
  Env env(world.grid, world.env);
  Observation obs = env.reset(*spec.trace, spec.seed);
  ServerId prev = obs.u;
  EncoderCursor cursor(net.shape.lstm_hidden);
  Trajectory tr;
  tr.trace_id = spec.trace->id;
  tr.seed = spec.seed;
  tr.steps.reserve(static_cast<std::size_t>(world.env.horizon));
  while (!env.done()) {
    const StepFeatures f = step_features(obs, prev);
    const PolicyOutput po = act(net, cursor.step(net.params, net.enc, f), rng);
    const StepOutcome so = env.step(ServerId(po.action));
    tr.push({f, po.action, po.log_prob, so.reward, so.breakdown}, gamma);
    prev = ServerId(po.action);
    obs = so.obs;
  }
  return tr;
}

Gae compute_gae(std::span<const double> rewards, std::span<const double> values, double gamma,
                double lambda) {
  if (values.size() != rewards.size() + 1)
    throw Error(Errc::LengthMismatch, "values must have one more entry than rewards");
  const std::size_t T = rewards.size();
  Gae g;
  g.deltas.resize(T);
  g.advantages.resize(T);
  for (std::size_t t = 0; t < T; ++t)
    g.deltas[t] = rewards[t] + gamma * values[t + 1] - values[t];
  double next = 0.0;
  for (std::size_t t = T; t-- > 0;) {
    next = g.deltas[t] + gamma * lambda * next;
    g.advantages[t] = next;
  }
  return g;
}

double clipped_surrogate(double ratio, double advantage, double eps) noexcept {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

namespace {

struct BatchPass {
  EncoderPass enc;
  HeadPass actor;
  HeadPass critic;
  Mat log_probs;
  std::size_t steps = 0;
  std::size_t batch = 0;
};

BatchPass forward_batch(const DracmNet& net, std::span<const Trajectory* const> batch,
                        bool with_critic) {
  if (batch.empty()) throw Error(Errc::EmptyBatch, "empty minibatch");
  std::vector<const std::vector<StepFeatures>*> seqs;
  seqs.reserve(batch.size());
  for (const auto* tr : batch) seqs.push_back(&tr->features);
  BatchPass p;
  p.batch = batch.size();
  p.steps = batch.front()->steps.size();
  p.enc = encode_batch(net.params, net.enc, seqs);
  p.actor = head_forward(net.params, net.actor, p.enc.h());
  if (with_critic) p.critic = head_forward(net.params, net.critic, p.enc.h());
  p.log_probs = nn::log_softmax_rows(p.actor.out);
  return p;
}

}  // namespace

std::vector<std::vector<double>> policy_log_probs(const DracmNet& net,
                                                  std::span<const Trajectory* const> batch) {
  const BatchPass p = forward_batch(net, batch, false);
  std::vector<std::vector<double>> out(p.batch, std::vector<double>(p.steps));
  for (std::size_t t = 0; t < p.steps; ++t)
    for (std::size_t b = 0; b < p.batch; ++b)
      out[b][t] = p.log_probs(static_cast<Index>(t * p.batch + b), batch[b]->steps[t].action);
  return out;
}

LossTerms dracm_loss(DracmNet& net, std::span<const Trajectory* const> batch,
                     std::span<const std::vector<double>* const> advantages,
                     const TrainerConfig& cfg, bool with_grad) {
  if (batch.size() != advantages.size())
    throw Error(Errc::LengthMismatch, "one advantage row per trajectory");
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (advantages[b]->size() != batch[b]->steps.size())
      throw Error(Errc::LengthMismatch, "advantages vs trajectory length");
    for (const auto& s : batch[b]->steps)
      if (!std::isfinite(s.behavior_log_prob))
        throw Error(Errc::MissingBehaviorLogProb, "trajectory " + batch[b]->trace_id);
  }

  const BatchPass p = forward_batch(net, batch, true);
  const std::size_t B = p.batch, T = p.steps;
  const double N = static_cast<double>(B * T);
  const Index A = p.actor.out.cols();

  LossTerms lt;
  Mat dlogits = Mat::Zero(static_cast<Index>(B * T), A);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t b = 0; b < B; ++b) {
      const auto r = static_cast<Index>(t * B + b);
      const TrajectoryStep& st = batch[b]->steps[t];
      const double adv = (*advantages[b])[t];
      const auto logp = p.log_probs.row(r);
      const double lp = logp(st.action);
      const double ratio = std::exp(lp - st.behavior_log_prob);
      const double unclipped = ratio * adv;
      const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * adv;
      lt.surrogate += std::min(unclipped, clipped);
      double h = 0.0;
      for (Index k = 0; k < A; ++k) h -= std::exp(logp(k)) * logp(k);
      lt.entropy += h;

      if (with_grad) {
        // d(-objective)/dlogits, objective averaged over all N steps.
        const double dsurr_dlp = unclipped <= clipped ? ratio * adv : 0.0;
        auto g = dlogits.row(r);
        for (Index k = 0; k < A; ++k) {
          const double pk = std::exp(logp(k));
          const double dlp = (k == st.action ? 1.0 : 0.0) - pk;
          const double dent = -pk * (logp(k) + h);
          g(k) = -(dsurr_dlp * dlp + cfg.entropy_coef * dent) / N;
        }
      }
    }
  }
  lt.surrogate /= N;
  lt.entropy /= N;
  lt.actor_objective = lt.surrogate + cfg.entropy_coef * lt.entropy;

  // Critic: delta_t = r_t + gamma v_{t+1} - v_t with v_T = 0.
  const Mat& v = p.critic.out;
  Mat dv = Mat::Zero(static_cast<Index>(B * T), 1);
  for (std::size_t b = 0; b < B; ++b) {
    double prev_delta = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const auto r = static_cast<Index>(t * B + b);
      const double v_next = t + 1 < T ? v(static_cast<Index>((t + 1) * B + b), 0) : 0.0;
      const double delta = batch[b]->steps[t].reward + cfg.gamma * v_next - v(r, 0);
      lt.critic_loss += delta * delta;
      dv(r, 0) = 2.0 / N * (-delta + (t > 0 ? cfg.gamma * prev_delta : 0.0));
      prev_delta = delta;
    }
  }
  lt.critic_loss /= N;
  lt.total = lt.critic_loss - lt.actor_objective;

  if (with_grad) {
    const Mat& h = p.enc.h();
    Mat dh = head_backward(net.params, net.actor, h, p.actor, dlogits);
    dh += head_backward(net.params, net.critic, h, p.critic, dv);
    encoder_backward(net.params, net.enc, p.enc, dh);
  }
  return lt;
}

EvalReport summarize(std::span<const double> latencies, std::span<const CostBreakdown> breakdowns) {
  if (latencies.empty()) throw Error(Errc::EmptyTestSet, "no episodes to summarize");
  EvalReport r;
  r.episode_latency.assign(latencies.begin(), latencies.end());
  const double n = static_cast<double>(latencies.size());
  r.mean_latency_s = std::accumulate(latencies.begin(), latencies.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : latencies) ss += (x - r.mean_latency_s) * (x - r.mean_latency_s);
  r.std_latency_s = std::sqrt(ss / n);
  for (const auto& b : breakdowns) r.mean_breakdown += b;
  r.mean_breakdown.migration /= n;
  r.mean_breakdown.computation /= n;
  r.mean_breakdown.access /= n;
  r.mean_breakdown.backhaul /= n;
  return r;
}

namespace {

std::uint64_t digest(const std::vector<std::vector<double>>& rows) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& row : rows) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(row.data());
    for (std::size_t i = 0; i < row.size() * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace

Trainer::Trainer(World world, NetShape shape, TrainerConfig cfg, std::uint64_t seed)
    : world_(world), cfg_(cfg), seed_(seed), net_(shape, seed), behavior_(net_) {
  cfg_.validate();
  world_.grid.validate();
  world_.env.validate();
  if (shape.servers != world_.grid.num_servers())
    throw Error(Errc::ConfigInvalid, "network action count must equal the number of servers");
  opt_.lr = cfg_.learning_rate;
}

IterationReport Trainer::train_iteration(const TraceSampler& sampler) {
  const auto started = std::chrono::steady_clock::now();
  IterationReport rep;
  rep.iteration = iteration_;

  // Sampling: the behavior policy is a frozen copy of the current parameters.
  behavior_.params.copy_values_from(net_.params);
  const auto n_ep = static_cast<std::size_t>(cfg_.episodes_per_iteration);
  std::vector<Trajectory> trajs;
  trajs.reserve(n_ep);
  for (std::size_t e = 0; e < n_ep; ++e) {
    Rng policy_rng = make_stream(seed_, StreamPurpose::Policy, static_cast<std::uint64_t>(iteration_), e);
    trajs.push_back(rollout(behavior_, world_, sampler(iteration_, static_cast<int>(e)), &policy_rng,
                            cfg_.gamma));
    rep.mean_latency_s += trajs.back().total_latency / static_cast<double>(n_ep);
    rep.mean_return += trajs.back().episode_return / static_cast<double>(n_ep);
  }

  // Advantages, computed once with the critic at sampling time.
  std::vector<const Trajectory*> all;
  for (const auto& t : trajs) all.push_back(&t);
  std::vector<std::vector<double>> adv(n_ep);
  {
    const BatchPass p = forward_batch(behavior_, all, true);
    for (std::size_t b = 0; b < n_ep; ++b) {
      std::vector<double> rewards, values;
      for (std::size_t t = 0; t < p.steps; ++t) {
        rewards.push_back(trajs[b].steps[t].reward);
        values.push_back(p.critic.out(static_cast<Index>(t * n_ep + b), 0));
      }
      values.push_back(0.0);
      adv[b] = compute_gae(rewards, values, cfg_.gamma, cfg_.lambda).advantages;
    }
  }
  if (cfg_.normalize_advantages) {
    double sum = 0.0, sq = 0.0, n = 0.0;
    for (const auto& row : adv)
      for (double a : row) {
        sum += a;
        n += 1.0;
      }
    const double mean = sum / n;
    for (const auto& row : adv)
      for (double a : row) sq += (a - mean) * (a - mean);
    const double sd = std::sqrt(sq / n);
    for (auto& row : adv)
      for (double& a : row) a = sd > 1e-12 ? (a - mean) / sd : a - mean;
  }

  // Updates.
  net_.params.zero_grad();
  std::vector<std::size_t> order(n_ep);
  const auto mb = static_cast<std::size_t>(cfg_.minibatch_trajectories);
  double actor_loss = 0.0, critic_loss = 0.0, entropy = 0.0;
  int updates = 0;
  for (int epoch = 0; epoch < cfg_.update_epochs; ++epoch) {
    rep.advantage_digests.push_back(digest(adv));
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = make_stream(seed_, StreamPurpose::Shuffle, static_cast<std::uint64_t>(iteration_),
                              static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle);
    for (std::size_t start = 0; start < n_ep; start += mb) {
      std::vector<const Trajectory*> batch;
      std::vector<const std::vector<double>*> batch_adv;
      for (std::size_t k = start; k < std::min(n_ep, start + mb); ++k) {
        batch.push_back(&trajs[order[k]]);
        batch_adv.push_back(&adv[order[k]]);
      }
      const LossTerms lt = dracm_loss(net_, batch, batch_adv, cfg_, true);
      nn::adam_update(net_.params, opt_);
      actor_loss += -lt.actor_objective;
      critic_loss += lt.critic_loss;
      entropy += lt.entropy;
      ++updates;
    }
  }
  if (updates > 0) {
    rep.actor_loss = actor_loss / updates;
    rep.critic_loss = critic_loss / updates;
    rep.entropy = entropy / updates;
  }
  rep.trajectories = std::move(trajs);
  rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  ++iteration_;
  return rep;
}

EvalReport Trainer::evaluate(std::span<const EpisodeSpec> episodes) const {
  if (episodes.empty()) throw Error(Errc::EmptyTestSet, "no evaluation episodes");
  std::vector<double> lat;
  std::vector<CostBreakdown> bd;
  for (const auto& spec : episodes) {
    const Trajectory tr = rollout(net_, world_, spec, nullptr, cfg_.gamma);
    lat.push_back(tr.total_latency);
    bd.push_back(tr.breakdown);
  }
  return summarize(lat, bd);
}

void DracmAgent::init(const agents::EpisodeContext& ctx) {
  cursor_.reset(net_->shape.lstm_hidden);
  prev_ = ctx.initial_server;
  ready_ = true;
}

agents::AgentDecision DracmAgent::act(const Observation& obs, int /*t*/) {
  if (!ready_) throw Error(Errc::NotInitialized, "DRACM agent used before init");
  const Mat& h = cursor_.step(net_->params, net_->enc, step_features(obs, prev_));
  const PolicyOutput po = dracm::act(*net_, h, nullptr);
  prev_ = ServerId(po.action);
  return {prev_, po.probs, std::nullopt};
}

}  // namespace edgemig::dracm
