#include <gtest/gtest.h>

#include <cmath>

#include "edgemig/env.hpp"
#include "edgemig/error.hpp"
#include "edgemig/traces.hpp"

using namespace edgemig;

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

SlotTrace straight_trace(const GridSpec& g, int n) {
  SlotTrace t;
  t.id = "line";
  for (int i = 0; i < n; ++i) {
    const double f = (i % 16) / 16.0 + 1.0 / 32.0;
    t.slots.push_back({g.lat_min + 0.3 * (g.lat_max - g.lat_min), g.lon_min + f * (g.lon_max - g.lon_min)});
  }
  return t;
}

SlotTrace parked_trace(const GridSpec& g, int n) {
  SlotTrace t;
  t.id = "parked";
  t.slots.assign(static_cast<std::size_t>(n), {0.5 * (g.lat_min + g.lat_max), 0.5 * (g.lon_min + g.lon_max)});
  return t;
}

}  // namespace

TEST(CostModel, MigrationDelay) {
  EXPECT_EQ(migration_delay(0, 2.0), 0.0);
  EXPECT_NEAR(migration_delay(3, 2.0), 6.0, 1e-12);
  EXPECT_NEAR(migration_delay(1, 1.5), 1.5, 1e-12);
  EXPECT_EQ(code_of([] { migration_delay(-1, 1.0); }), Errc::NegativeHops);
}

TEST(CostModel, ComputationDelay) {
  EXPECT_EQ(computation_delay(0, 0, 1.28e11), 0.0);
  EXPECT_NEAR(computation_delay(4e9, 6e10, 1.28e11), 0.5, 1e-12);
  EXPECT_NEAR(computation_delay(1.28e11, 0, 1.28e11), 1.0, 1e-12);
  EXPECT_EQ(code_of([] { computation_delay(1, 1, 0.0); }), Errc::ZeroCapacity);
}

TEST(CostModel, AccessDelay) {
  EXPECT_EQ(access_delay(0, 12e6), 0.0);
  EXPECT_NEAR(access_delay(2.4e7, 12e6), 2.0, 1e-12);
  EXPECT_NEAR(access_delay(4e7, 60e6), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(code_of([] { access_delay(1, 0.0); }), Errc::ZeroRate);
}

TEST(CostModel, BackhaulDelay) {
  EXPECT_EQ(backhaul_delay(0, 1e7, 5e8, 0.02), 0.0);
  EXPECT_NEAR(backhaul_delay(2, 1e7, 5e8, 0.02), 0.1, 1e-12);
  EXPECT_NEAR(backhaul_delay(1, 0, 5e8, 0.02), 0.04, 1e-12);
  EXPECT_EQ(code_of([] { backhaul_delay(1, 1, 0.0, 0.02); }), Errc::ZeroBandwidth);
}

TEST(CostModel, SlotCostExamples) {
  const GridSpec g = GridSpec::rome();
  const EnvConfig cfg;
  const ServerId o = server_of({0, 0}, g), right = server_of({0, 1}, g);

  SlotInputs idle{o, 12e6, 0, 0, 0, 2.0};
  EXPECT_EQ(slot_cost(o, o, idle, g, cfg).total(), 0.0);

  SlotInputs busy{o, 12e6, 4e9, 2.4e7, 6e10, 2.0};
  const CostBreakdown b = slot_cost(o, o, busy, g, cfg);
  EXPECT_NEAR(b.total(), 2.5, 1e-9);
  EXPECT_EQ(b.migration, 0.0);
  EXPECT_EQ(b.backhaul, 0.0);

  SlotInputs away{o, 60e6, 0, 1e7, 0, 1.0};
  const CostBreakdown m = slot_cost(o, right, away, g, cfg);
  EXPECT_NEAR(m.migration, 1.0, 1e-12);
  EXPECT_NEAR(m.access, 1e7 / 60e6, 1e-12);
  EXPECT_NEAR(m.backhaul, 0.02 + 0.04, 1e-12);
  EXPECT_NEAR(m.total(), 1.0 + 1e7 / 60e6 + 0.06, 1e-12);
  EXPECT_EQ(m.total(), m.migration + m.computation + m.access + m.backhaul);
}

TEST(Sampling, ZeroUserRateGivesNoTasks) {
  EnvConfig cfg;
  cfg.user_rate = 0.0;
  Rng rng = make_stream(1, StreamPurpose::Check);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_user_tasks(rng, cfg).empty());
}

TEST(Sampling, TaskCountMeanAndInvariant) {
  const EnvConfig cfg;
  Rng rng = make_stream(2, StreamPurpose::Check);
  double n = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto tasks = sample_user_tasks(rng, cfg);
    n += static_cast<double>(tasks.size());
    for (const Task& t : tasks) {
      ASSERT_EQ(t.cycles, t.data * t.kappa);
      ASSERT_GE(t.data, cfg.data_bits.lo);
      ASSERT_LE(t.data, cfg.data_bits.hi);
      ASSERT_GE(t.kappa, cfg.kappa_cycles_per_bit.lo);
      ASSERT_LE(t.kappa, cfg.kappa_cycles_per_bit.hi);
    }
  }
  EXPECT_NEAR(n / 100000.0, 2.0, 0.02);
}

TEST(Sampling, ZeroServerRatesGiveZeroLoads) {
  EnvConfig cfg;
  cfg.server_rate = {0.0, 0.0};
  Rng rng = make_stream(3, StreamPurpose::Check);
  const auto rates = draw_server_rates(64, rng, cfg);
  for (double l : sample_server_loads(rates, rng, cfg)) EXPECT_EQ(l, 0.0);
}

TEST(Sampling, BackgroundLoadMean) {
  const EnvConfig cfg;
  Rng rng = make_stream(4, StreamPurpose::Check);
  const double mu = cfg.data_bits.mid() * cfg.kappa_cycles_per_bit.mid();  // independent uniforms
  double total = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double w = sample_background_load(10.0, rng, cfg);
    ASSERT_GE(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total / 10000.0 / (10.0 * mu), 1.0, 0.03);
}

TEST(Env, ResetIsDeterministicAndLocatesUser) {
  const GridSpec g = GridSpec::rome();
  const SlotTrace tr = straight_trace(g, 100);
  Env a(g, EnvConfig{}), b(g, EnvConfig{});
  const Observation oa = a.reset(tr, 9), ob = b.reset(tr, 9);
  EXPECT_EQ(oa, ob);
  EXPECT_EQ(oa.u, locate_server(tr.slots[0].lat, tr.slots[0].lon, g));
  const double tiers[] = {12e6, 24e6, 36e6, 48e6, 60e6};
  EXPECT_NE(std::find(std::begin(tiers), std::end(tiers), oa.rho), std::end(tiers));
  EXPECT_EQ(a.state().serving, oa.u);
}

TEST(Env, TraceTooShort) {
  const GridSpec g = GridSpec::rome();
  Env env(g, EnvConfig{});
  EXPECT_EQ(code_of([&] { env.reset(straight_trace(g, 99), 1); }), Errc::TraceTooShort);
}

TEST(Env, ExactlyHorizonStepsThenFinished) {
  const GridSpec g = GridSpec::rome();
  Env env(g, EnvConfig{});
  EXPECT_EQ(code_of([&] { env.step(ServerId(0)); }), Errc::NotInitialized);
  env.reset(straight_trace(g, 120), 2);
  int steps = 0;
  while (!env.done()) {
    const StepOutcome o = env.step(env.state().user_cell);
    EXPECT_LE(o.reward, 0.0);
    EXPECT_EQ(o.breakdown.backhaul, 0.0);
    EXPECT_DOUBLE_EQ(o.reward, -o.breakdown.total() / 10.0);
    EXPECT_EQ(o.done, steps + 1 == 100);
    ++steps;
  }
  EXPECT_EQ(steps, 100);
  EXPECT_EQ(code_of([&] { env.step(ServerId(0)); }), Errc::EpisodeFinished);
}

TEST(Env, UnknownServerAction) {
  const GridSpec g = GridSpec::rome();
  Env env(g, EnvConfig{});
  env.reset(straight_trace(g, 100), 2);
  EXPECT_EQ(code_of([&] { env.step(ServerId(64)); }), Errc::UnknownServer);
}

TEST(Env, IdleColocatedSlotHasZeroReward) {
  const GridSpec g = GridSpec::rome();
  EnvConfig cfg;
  cfg.user_rate = 0.0;
  cfg.server_rate = {0.0, 0.0};  // background work alone still costs w/f
  Env env(g, cfg);
  const Observation o = env.reset(parked_trace(g, 100), 3);
  const StepOutcome s = env.step(o.u);
  EXPECT_EQ(s.reward, 0.0);
  EXPECT_EQ(s.breakdown.total(), 0.0);
}

TEST(Env, ExogenousSequencesIgnoreActions) {
  const GridSpec g = GridSpec::rome();
  const SlotTrace tr = straight_trace(g, 100);
  Env nm(g, EnvConfig{}), am(g, EnvConfig{}), rnd(g, EnvConfig{});
  const ServerId home = nm.reset(tr, 17).u;
  am.reset(tr, 17);
  rnd.reset(tr, 17);
  Rng pick = make_stream(1, StreamPurpose::Check);
  std::uniform_int_distribution<int> any(0, 63);
  const OracleSnapshot snap = oracle_snapshot(tr, 17, g, EnvConfig{});
  for (int t = 0; t < 100; ++t) {
    const EnvState s1 = nm.state(), s2 = am.state(), s3 = rnd.state();
    EXPECT_EQ(s1.user_cell, snap.user_cell[t]);
    EXPECT_EQ(s1.mc, s2.mc);
    EXPECT_EQ(s1.mc, s3.mc);
    EXPECT_TRUE(std::equal(s1.server_loads.begin(), s1.server_loads.end(), s3.server_loads.begin()));
    EXPECT_EQ(snap.observation(t), snap.observation(t));
    const StepOutcome a = nm.step(home), b = am.step(s2.user_cell), c = rnd.step(ServerId(any(pick)));
    if (t + 1 < 100) {
      EXPECT_EQ(a.obs, snap.observation(t + 1));
      EXPECT_EQ(a.obs, b.obs);
      EXPECT_EQ(a.obs, c.obs);
    }
  }
  EXPECT_EQ(snapshot_digest(nm.snapshot()), snapshot_digest(rnd.snapshot()));
}

TEST(Env, ReplayReproducesRewards) {
  const GridSpec g = GridSpec::synthetic(4, 4);
  const SlotTrace tr = traces::synth_trace(8, g, 100, {});
  Rng pick = make_stream(2, StreamPurpose::Check);
  std::uniform_int_distribution<int> any(0, 15);
  std::vector<ServerId> actions;
  for (int i = 0; i < 100; ++i) actions.emplace_back(any(pick));
  auto play = [&] {
    Env env(g, EnvConfig{});
    env.reset(tr, 44);
    std::vector<double> r;
    for (ServerId a : actions) r.push_back(env.step(a).reward);
    return r;
  };
  EXPECT_EQ(play(), play());
}

TEST(Env, SnapshotShapesAndEquality) {
  const GridSpec g = GridSpec::rome();
  const SlotTrace tr = straight_trace(g, 130);
  const OracleSnapshot a = oracle_snapshot(tr, 5, g, EnvConfig{}), b = oracle_snapshot(tr, 5, g, EnvConfig{});
  EXPECT_EQ(a.horizon(), 100);
  EXPECT_EQ(a.user_cell.size(), 100u);
  EXPECT_EQ(a.server_loads.size(), 100u);
  EXPECT_EQ(a.mc.size(), 100u);
  EXPECT_EQ(snapshot_digest(a), snapshot_digest(b));
  EXPECT_NE(snapshot_digest(a), snapshot_digest(oracle_snapshot(tr, 6, g, EnvConfig{})));
  for (int t = 0; t < 100; ++t) {
    EXPECT_GE(a.mc[t], 1.0);
    EXPECT_LE(a.mc[t], 3.0);
  }
}

TEST(Env, WorldScopedRatesShareLoadLevelsAcrossEpisodes) {
  const GridSpec g = GridSpec::synthetic(3, 3);
  EnvConfig cfg;
  cfg.horizon = 400;
  cfg.user_rate = 0.0;
  const SlotTrace tr = parked_trace(g, 400);
  auto mean_loads = [&](std::uint64_t seed) {
    const OracleSnapshot s = oracle_snapshot(tr, seed, g, cfg);
    std::vector<double> m(9, 0.0);
    for (const auto& row : s.server_loads)
      for (int k = 0; k < 9; ++k) m[k] += row[k] / 400.0;
    return m;
  };
  const auto a = mean_loads(1), b = mean_loads(2);
  for (int k = 0; k < 9; ++k) EXPECT_NEAR(a[k] / b[k], 1.0, 0.25);
}
