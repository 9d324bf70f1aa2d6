#include "edgemig/dqlm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "edgemig/error.hpp"

namespace edgemig::dqlm {

using Index = Eigen::Index;

QNet::QNet(NetShape s, std::uint64_t seed) : shape(s) {
  if (s.servers < 1 || s.embed_dim < 1 || s.lstm_hidden < 1 || s.head_hidden < 1)
    throw Error(Errc::ConfigInvalid, "network sizes must be positive");
  enc = dracm::add_encoder(params, shape, "enc");
  head = dracm::add_head(params, "q", shape.lstm_hidden, shape.head_hidden, shape.servers);
  Rng rng = make_stream(seed, StreamPurpose::ParamInit, 1);
  dracm::init_encoder(params, enc, rng);
  dracm::init_head(params, head, rng);
}

Mat q_values(const QNet& net, const Mat& h) { return dracm::head_forward(net.params, net.head, h).out; }

int epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng) {
  if (q.empty()) throw Error(Errc::EmptyBatch, "no actions");
  if (epsilon > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon)
    return std::uniform_int_distribution<int>(0, static_cast<int>(q.size()) - 1)(rng);
  return nn::argmax(q);
}

double epsilon_at(long iteration, int iterations, double start, double end) {
  const double half = 0.5 * static_cast<double>(iterations);
  if (half <= 0.0) return end;
  const double frac = static_cast<double>(iteration) / half;
  if (frac >= 1.0) return end;
  return start + (end - start) * frac;
}

namespace {

dracm::EncoderPass encode(const QNet& net, std::span<const Trajectory* const> batch) {
  std::vector<const std::vector<dracm::StepFeatures>*> seqs;
  for (const auto* t : batch) seqs.push_back(&t->features);
  return dracm::encode_batch(net.params, net.enc, seqs);
}

}  // namespace

double td_loss(QNet& net, const QNet& target, std::span<const Trajectory* const> batch, double gamma,
               bool with_grad) {
  if (batch.empty()) throw Error(Errc::EmptyBatch, "empty TD minibatch");
  const std::size_t B = batch.size();
  const std::size_t T = batch.front()->steps.size();
  if (T == 0) throw Error(Errc::EmptyBatch, "empty trajectory");

  const dracm::EncoderPass pass = encode(net, batch);
  const dracm::HeadPass q = dracm::head_forward(net.params, net.head, pass.h());
  Mat q_next;
  if (gamma != 0.0) q_next = q_values(target, encode(target, batch).h());

  const double N = static_cast<double>(B * T);
  Mat dq = Mat::Zero(q.out.rows(), q.out.cols());
  double loss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t b = 0; b < B; ++b) {
      const auto r = static_cast<Index>(t * B + b);
      const auto& st = batch[b]->steps[t];
      double y = st.reward;
      if (t + 1 < T && gamma != 0.0) y += gamma * q_next.row(static_cast<Index>((t + 1) * B + b)).maxCoeff();
      const double err = y - q.out(r, st.action);
      loss += err * err;
      dq(r, st.action) = -2.0 * err / N;
    }
  }
  if (with_grad) {
    const Mat dh = dracm::head_backward(net.params, net.head, pass.h(), q, dq);
    dracm::encoder_backward(net.params, net.enc, pass, dh);
  }
  return loss / N;
}

Trajectory rollout(const QNet& net, const World& world, const EpisodeSpec& spec, double epsilon,
                   Rng& rng, double gamma) {
  Env env(world.grid, world.env);
  Observation obs = env.reset(*spec.trace, spec.seed);
  ServerId prev = obs.u;
  dracm::EncoderCursor cursor(net.shape.lstm_hidden);
  Trajectory tr;
  tr.trace_id = spec.trace->id;
  tr.seed = spec.seed;
  const double M = static_cast<double>(net.shape.servers);
  while (!env.done()) {
    const dracm::StepFeatures f = dracm::step_features(obs, prev);
    const Mat q = q_values(net, cursor.step(net.params, net.enc, f));
    const std::span<const double> qs(q.data(), static_cast<std::size_t>(q.cols()));
    const int a = epsilon_greedy(qs, epsilon, rng);
    const double p = epsilon / M + (a == nn::argmax(qs) ? 1.0 - epsilon : 0.0);
    const StepOutcome so = env.step(ServerId(a));
    tr.push({f, a, std::log(p), so.reward, so.breakdown}, gamma);
    prev = ServerId(a);
    obs = so.obs;
  }
  return tr;
}

Trainer::Trainer(World world, NetShape shape, dracm::TrainerConfig cfg, std::uint64_t seed,
                 int target_sync_epochs)
    : world_(world),
      cfg_(cfg),
      seed_(seed),
      sync_every_(target_sync_epochs),
      net_(shape, seed),
      target_(net_) {
  cfg_.validate();
  if (sync_every_ < 1) throw Error(Errc::ConfigInvalid, "target sync cadence must be >= 1");
  if (shape.servers != world_.grid.num_servers())
    throw Error(Errc::ConfigInvalid, "network action count must equal the number of servers");
  opt_.lr = cfg_.learning_rate;
}

DqlmReport Trainer::train_iteration(const TraceSampler& sampler) {
  const auto started = std::chrono::steady_clock::now();
  DqlmReport rep;
  rep.iteration = iteration_;
  rep.epsilon = epsilon_at(iteration_, cfg_.iterations);
  const auto n_ep = static_cast<std::size_t>(cfg_.episodes_per_iteration);
  std::vector<Trajectory> trajs;
  for (std::size_t e = 0; e < n_ep; ++e) {
    Rng rng = make_stream(seed_, StreamPurpose::Policy, static_cast<std::uint64_t>(iteration_), e);
    trajs.push_back(rollout(net_, world_, sampler(iteration_, static_cast<int>(e)), rep.epsilon, rng,
                            cfg_.gamma));
    rep.mean_latency_s += trajs.back().total_latency / static_cast<double>(n_ep);
  }

  net_.params.zero_grad();
  std::vector<std::size_t> order(n_ep);
  const auto mb = static_cast<std::size_t>(cfg_.minibatch_trajectories);
  double loss = 0.0;
  int updates = 0;
  for (int epoch = 0; epoch < cfg_.update_epochs; ++epoch, ++epochs_) {
    if (epochs_ % sync_every_ == 0) target_.params.copy_values_from(net_.params);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = make_stream(seed_, StreamPurpose::Shuffle, static_cast<std::uint64_t>(iteration_),
                              static_cast<std::uint64_t>(epoch) + (1ull << 32));
    std::shuffle(order.begin(), order.end(), shuffle);
    for (std::size_t start = 0; start < n_ep; start += mb) {
      std::vector<const Trajectory*> batch;
      for (std::size_t k = start; k < std::min(n_ep, start + mb); ++k) batch.push_back(&trajs[order[k]]);
      loss += td_loss(net_, target_, batch, cfg_.gamma, true);
      nn::adam_update(net_.params, opt_);
      ++updates;
    }
  }
  if (updates > 0) rep.td_loss = loss / updates;
  rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  ++iteration_;
  return rep;
}

dracm::EvalReport Trainer::evaluate(std::span<const EpisodeSpec> episodes) const {
  if (episodes.empty()) throw Error(Errc::EmptyTestSet, "no evaluation episodes");
  std::vector<double> lat;
  std::vector<CostBreakdown> bd;
  Rng unused = make_stream(seed_, StreamPurpose::Policy, ~0ull);
  for (const auto& spec : episodes) {
    const Trajectory tr = rollout(net_, world_, spec, 0.0, unused, cfg_.gamma);
    lat.push_back(tr.total_latency);
    bd.push_back(tr.breakdown);
  }
  return dracm::summarize(lat, bd);
}

DqlmAgent::DqlmAgent(const QNet& net, double epsilon, std::uint64_t seed)
    : net_(&net), epsilon_(epsilon), rng_(make_stream(seed, StreamPurpose::Policy, ~0ull, 1)) {}

void DqlmAgent::init(const agents::EpisodeContext& ctx) {
  cursor_.reset(net_->shape.lstm_hidden);
  prev_ = ctx.initial_server;
  ready_ = true;
}

agents::AgentDecision DqlmAgent::act(const Observation& obs, int) {
  if (!ready_) throw Error(Errc::NotInitialized, "DQLM agent used before init");
  const Mat q = q_values(*net_, cursor_.step(net_->params, net_->enc, dracm::step_features(obs, prev_)));
  agents::AgentDecision d;
  d.values.assign(q.data(), q.data() + q.cols());
  d.action = ServerId(epsilon_greedy(d.values, epsilon_, rng_));
  d.epsilon = epsilon_;
  prev_ = d.action;
  return d;
}

}  // namespace edgemig::dqlm
