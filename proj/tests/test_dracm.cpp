#include <gtest/gtest.h>

#include <cmath>

#include "edgemig/dracm.hpp"
#include "edgemig/error.hpp"
#include "edgemig/traces.hpp"
#include "fd_oracle.hpp"

using namespace edgemig;
using namespace edgemig::dracm;

namespace {

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no edgemig::Error thrown";
  return Errc::ConfigInvalid;
}

World toy_world(int rows, int cols, int horizon) {
  World w{GridSpec::synthetic(rows, cols), EnvConfig{}};
  w.env.horizon = horizon;
  return w;
}

std::vector<SlotTrace> pool(const World& w, int n, std::uint64_t base = 0) {
  std::vector<SlotTrace> out;
  for (int i = 0; i < n; ++i) out.push_back(traces::synth_trace(base + i, w.grid, w.env.horizon, {}));
  return out;
}

TrainerConfig small_cfg() {
  TrainerConfig c;
  c.episodes_per_iteration = 4;
  c.update_epochs = 3;
  c.minibatch_trajectories = 2;
  c.iterations = 3;
  return c;
}

bool same_report(const IterationReport& a, const IterationReport& b) {
  if (a.mean_latency_s != b.mean_latency_s || a.actor_loss != b.actor_loss || a.critic_loss != b.critic_loss ||
      a.entropy != b.entropy || a.advantage_digests != b.advantage_digests ||
      a.trajectories.size() != b.trajectories.size())
    return false;
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    const auto &x = a.trajectories[i], &y = b.trajectories[i];
    if (x.steps.size() != y.steps.size()) return false;
    for (std::size_t t = 0; t < x.steps.size(); ++t)
      if (x.steps[t].action != y.steps[t].action || x.steps[t].reward != y.steps[t].reward) return false;
  }
  return true;
}

}  // namespace

TEST(Encoder, FeatureLayoutAndScaling) {
  nn::Tensor table({9, 2});
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = static_cast<double>(i);
  Observation o;
  o.u = ServerId(3);
  o.rho = 60e6;
  const auto e = featurize(o, ServerId(5), table);
  ASSERT_EQ(e.size(), 7u);
  EXPECT_EQ(e[0], 6.0);
  EXPECT_EQ(e[1], 7.0);
  EXPECT_EQ(e[2], 10.0);
  EXPECT_EQ(e[3], 11.0);
  EXPECT_DOUBLE_EQ(e[4], 1.0);
  EXPECT_EQ(e[5], 0.0);  // no tasks this slot
  EXPECT_EQ(e[6], 0.0);
}

TEST(Encoder, ZeroParametersGiveZeroState) {
  DracmNet net({4, 2, 6, 5}, 1);
  for (auto& p : net.params) p.value.fill(0.0);
  const std::vector<StepFeatures> xs{{0, 0, 1.0, 0.5, 0.2}, {3, 0, 0.4, 0.0, 0.0}};
  const Mat h = encode(net, xs);
  EXPECT_EQ(h.rows(), 2);
  EXPECT_EQ(h.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Encoder, LastStateRemembersFirstInput) {
  DracmNet net({4, 2, 6, 5}, 2);
  std::vector<StepFeatures> a{{0, 0, 1.0, 0.5, 0.2}, {1, 0, 0.4, 0.0, 0.0}, {2, 1, 0.8, 0.1, 0.1}};
  std::vector<StepFeatures> b = a;
  b[0].u = 3;
  const Mat ha = encode(net, a), hb = encode(net, b);
  EXPECT_GT((ha.row(2) - hb.row(2)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(encode(net, a), ha);
}

TEST(Policy, ZeroActorHeadIsUniform) {
  DracmNet net({5, 2, 6, 4}, 3);
  net.params[net.actor.w2].value.fill(0.0);
  net.params[net.actor.b2].value.fill(0.0);
  const Mat h = encode(net, {{1, 2, 0.3, 0.2, 0.1}});
  Rng rng = make_stream(1, StreamPurpose::Check);
  const PolicyOutput p = act(net, h, &rng);
  for (double q : p.probs) EXPECT_NEAR(q, 0.2, 1e-15);
  EXPECT_NEAR(p.log_prob, -std::log(5.0), 1e-12);
  EXPECT_NEAR(p.entropy, std::log(5.0), 1e-12);
}

TEST(Policy, GreedyTakesArgmax) {
  DracmNet net({6, 2, 6, 4}, 4);
  const Mat h = encode(net, {{1, 2, 0.3, 0.2, 0.1}});
  const PolicyOutput p = act(net, h, nullptr);
  for (double q : p.probs) EXPECT_LE(q, p.probs[static_cast<std::size_t>(p.action)]);
  EXPECT_DOUBLE_EQ(p.log_prob, std::log(p.probs[static_cast<std::size_t>(p.action)]));
}

TEST(Gae, LambdaZeroIsTdError) {
  const std::vector<double> r{-1.0, -0.5, -2.0, 0.3}, v{0.2, -0.4, 1.1, 0.7, 0.0};
  const Gae g = compute_gae(r, v, 0.9, 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double delta = r[t] + 0.9 * v[t + 1] - v[t];
    EXPECT_NEAR(g.deltas[t], delta, 1e-15);
    EXPECT_NEAR(g.advantages[t], delta, 1e-15);
  }
}

TEST(Gae, LambdaOneIsReturnMinusValue) {
  const std::vector<double> r{-1.0, -0.5, -2.0, 0.3}, v{0.2, -0.4, 1.1, 0.7, 0.0};
  const Gae g = compute_gae(r, v, 0.9, 1.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    double ret = 0.0, disc = 1.0;
    for (std::size_t k = t; k < r.size(); ++k, disc *= 0.9) ret += disc * r[k];
    EXPECT_NEAR(g.advantages[t], ret - v[t], 1e-12);
  }
  EXPECT_EQ(code_of([&] { compute_gae(r, std::vector<double>(4, 0.0), 0.9, 1.0); }), Errc::LengthMismatch);
}

TEST(Surrogate, HandCases) {
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.1, 2.0, 0.2), 2.2);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, 1.0, 0.2), 0.5);  // pessimistic side is unclipped
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, -1.0, 0.2), -1.5);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.0, 0.0, 0.2), 0.0);
}

class LossFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    world = toy_world(1, 3, 4);
    traces_ = pool(world, 3);
    Rng rng = make_stream(5, StreamPurpose::Check);
    for (int b = 0; b < 3; ++b) trajs.push_back(rollout(net, world, {&traces_[b], 10u + b}, &rng, 0.9));
    for (const auto& t : trajs) batch.push_back(&t);
    for (const auto& t : trajs) {
      std::vector<double> a;
      for (std::size_t i = 0; i < t.steps.size(); ++i) a.push_back(uniform(rng, -1.5, 1.5));
      adv.push_back(a);
    }
    for (const auto& a : adv) adv_ptr.push_back(&a);
    cfg.gamma = 0.9;
  }

  void set_behavior(double jitter, std::uint64_t seed) {
    Rng rng = make_stream(seed, StreamPurpose::Check);
    const auto lp = policy_log_probs(net, batch);
    for (std::size_t b = 0; b < trajs.size(); ++b)
      for (std::size_t t = 0; t < trajs[b].steps.size(); ++t)
        trajs[b].steps[t].behavior_log_prob = lp[b][t] + uniform(rng, -jitter, jitter);
  }

  World world;
  std::vector<SlotTrace> traces_;
  DracmNet net{{3, 2, 4, 4}, 6};
  std::vector<Trajectory> trajs;
  std::vector<const Trajectory*> batch;
  std::vector<std::vector<double>> adv;
  std::vector<const std::vector<double>*> adv_ptr;
  TrainerConfig cfg;
};

TEST_F(LossFixture, RatioOneSurrogateIsMeanAdvantage) {
  set_behavior(0.0, 1);
  const LossTerms l = dracm_loss(net, batch, adv_ptr, cfg, false);
  double sum = 0.0, n = 0.0;
  for (const auto& a : adv)
    for (double x : a) {
      sum += x;
      n += 1.0;
    }
  EXPECT_NEAR(l.surrogate, sum / n, 1e-12);
  EXPECT_NEAR(l.actor_objective, l.surrogate + cfg.entropy_coef * l.entropy, 1e-12);
  EXPECT_NEAR(l.total, l.critic_loss - l.actor_objective, 1e-12);
}

TEST_F(LossFixture, ClipInactiveNearRatioOne) {
  set_behavior(0.05, 2);
  TrainerConfig wide = cfg;
  wide.clip_eps = 10.0;
  net.params.zero_grad();
  const LossTerms a = dracm_loss(net, batch, adv_ptr, cfg, true);
  const nn::ParamStore ga = net.params;
  net.params.zero_grad();
  const LossTerms b = dracm_loss(net, batch, adv_ptr, wide, true);
  EXPECT_EQ(a.total, b.total);
  for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_EQ(ga[i].grad, net.params[i].grad) << ga[i].name;
}

TEST_F(LossFixture, GradientMatchesFiniteDifferences) {
  for (double jitter : {0.05, 0.6}) {
    set_behavior(jitter, 3);
    // h = 1e-4 with a 1e-7 floor: at smaller steps roundoff (~eps |L| / h)
    // dominates the near-zero LSTM gradients.
    const auto w = testing_fd::compare(
        net.params, [&](bool g) { return dracm_loss(net, batch, adv_ptr, cfg, g).total; }, 1e-4, 1e-7);
    EXPECT_LT(w.rel, 1e-4) << w.where;
  }
}

TEST_F(LossFixture, MissingBehaviorLogProbRejected) {
  trajs[1].steps[2].behavior_log_prob = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(code_of([&] { dracm_loss(net, batch, adv_ptr, cfg, false); }), Errc::MissingBehaviorLogProb);
}

TEST(Trainer, AdvantagesFrozenAcrossEpochs) {
  const World w = toy_world(2, 2, 6);
  const auto tr = pool(w, 5);
  Trainer t(w, {4, 2, 6, 6}, small_cfg(), 3);
  const auto rep = t.train_iteration(TraceSampler(tr, 3));
  ASSERT_EQ(rep.advantage_digests.size(), 3u);
  EXPECT_EQ(rep.advantage_digests[0], rep.advantage_digests[1]);
  EXPECT_EQ(rep.advantage_digests[1], rep.advantage_digests[2]);
}

TEST(Trainer, SameSeedSameRun) {
  const World w = toy_world(2, 2, 6);
  const auto tr = pool(w, 5);
  Trainer a(w, {4, 2, 6, 6}, small_cfg(), 11), b(w, {4, 2, 6, 6}, small_cfg(), 11);
  for (int i = 0; i < 3; ++i) {
    const auto ra = a.train_iteration(TraceSampler(tr, 11));
    const auto rb = b.train_iteration(TraceSampler(tr, 11));
    EXPECT_TRUE(same_report(ra, rb)) << "iteration " << i;
  }
  EXPECT_TRUE(a.net().params.same_values(b.net().params));
}

TEST(Trainer, ZeroLearningRateKeepsParameters) {
  const World w = toy_world(2, 2, 6);
  const auto tr = pool(w, 5);
  TrainerConfig c = small_cfg();
  c.learning_rate = 0.0;
  Trainer t(w, {4, 2, 6, 6}, c, 4);
  const nn::ParamStore before = t.net().params;
  t.train_iteration(TraceSampler(tr, 4));
  EXPECT_TRUE(t.net().params.same_values(before));
}

TEST(Trainer, SingleServerWorld) {
  const World w = toy_world(1, 1, 5);
  const auto tr = pool(w, 3);
  Trainer t(w, {1, 2, 4, 4}, small_cfg(), 5);
  const auto rep = t.train_iteration(TraceSampler(tr, 5));
  EXPECT_NEAR(rep.entropy, 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(rep.actor_loss));
  EXPECT_TRUE(std::isfinite(rep.critic_loss));
}

TEST(Trainer, EvaluationIsPure) {
  const World w = toy_world(2, 2, 6);
  const auto tr = pool(w, 4);
  Trainer t(w, {4, 2, 6, 6}, small_cfg(), 6);
  t.train_iteration(TraceSampler(tr, 6));
  const auto eps = evaluation_episodes(tr, 9, 2);
  const nn::ParamStore before = t.net().params;
  const EvalReport a = t.evaluate(eps), b = t.evaluate(eps);
  EXPECT_EQ(a.episode_latency, b.episode_latency);
  EXPECT_EQ(a.episode_latency.size(), 8u);
  EXPECT_TRUE(t.net().params.same_values(before));
  EXPECT_EQ(code_of([&] { t.evaluate({}); }), Errc::EmptyTestSet);
  EXPECT_EQ(code_of([&] { summarize({}, {}); }), Errc::EmptyTestSet);
}

TEST(Trainer, RejectsMismatchedShape) {
  const World w = toy_world(2, 2, 6);
  EXPECT_EQ(code_of([&] { Trainer(w, {9, 2, 6, 6}, small_cfg(), 1); }), Errc::ConfigInvalid);
  TrainerConfig c = small_cfg();
  c.clip_eps = -1.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), Errc::ConfigInvalid);
}

TEST(DracmAgentTest, MatchesGreedyRollout) {
  const World w = toy_world(3, 3, 12);
  const auto tr = pool(w, 1);
  DracmNet net({9, 2, 8, 8}, 7);
  const Trajectory g = rollout(net, w, {&tr[0], 4}, nullptr, 0.99);
  DracmAgent agent(net);
  const auto r = agents::run_episode(agent, w, {&tr[0], 4});
  for (std::size_t t = 0; t < g.steps.size(); ++t) EXPECT_EQ(r.actions[t].index, g.steps[t].action);
  EXPECT_EQ(r.total_latency, g.total_latency);
}
