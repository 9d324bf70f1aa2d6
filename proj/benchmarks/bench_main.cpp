#include <benchmark/benchmark.h>

#include "edgemig/agents.hpp"
#include "edgemig/dracm.hpp"
#include "edgemig/layers.hpp"
#include "edgemig/optim.hpp"
#include "edgemig/traces.hpp"

using namespace edgemig;

namespace {

World world(int side, int horizon) {
  World w{GridSpec::synthetic(side, side), EnvConfig{}};
  w.env.horizon = horizon;
  return w;
}

void BM_LstmForwardBackward(benchmark::State& st) {
  const auto H = static_cast<std::size_t>(st.range(0));
  const std::size_t I = 7, B = 16, T = 100;
  Rng rng = make_stream(1, StreamPurpose::Check);
  nn::ParamStore ps;
  const auto wx = ps.add("wx", {4 * H, I}), wh = ps.add("wh", {4 * H, H}), b = ps.add("b", {4 * H});
  for (std::size_t i = 0; i < ps.size(); ++i) ps.init_uniform(i, 0.1, rng);
  nn::Mat x = nn::Mat::Random(static_cast<Eigen::Index>(T * B), static_cast<Eigen::Index>(I));
  const nn::Mat dh = nn::Mat::Ones(static_cast<Eigen::Index>(T * B), static_cast<Eigen::Index>(H));
  for (auto _ : st) {
    const auto seq = nn::lstm_forward(x, B, ps[wx].value, ps[wh].value, ps[b].value);
    benchmark::DoNotOptimize(nn::lstm_backward(seq, dh, ps[wx], ps[wh], ps[b]));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(T * B));
}
BENCHMARK(BM_LstmForwardBackward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_OptimSolve(benchmark::State& st) {
  const World w = world(static_cast<int>(st.range(0)), 100);
  const SlotTrace tr = traces::synth_trace(1, w.grid, 100, {});
  const auto ct = agents::build_cost_tensor(oracle_snapshot(tr, 1, w.grid, w.env), w.grid, w.env);
  for (auto _ : st) benchmark::DoNotOptimize(agents::optim_solve(ct).total);
}
BENCHMARK(BM_OptimSolve)->Arg(3)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_EpisodeAlwaysMigrate(benchmark::State& st) {
  const World w = world(8, 100);
  const SlotTrace tr = traces::synth_trace(2, w.grid, 100, {});
  agents::AlwaysMigrate am;
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(agents::run_episode(am, w, {&tr, seed++}).total_latency);
}
BENCHMARK(BM_EpisodeAlwaysMigrate)->Unit(benchmark::kMillisecond);

void BM_DracmGreedyEpisode(benchmark::State& st) {
  const World w = world(8, 100);
  const SlotTrace tr = traces::synth_trace(3, w.grid, 100, {});
  const dracm::DracmNet net({64, 2, 256, 128}, 1);
  for (auto _ : st) benchmark::DoNotOptimize(dracm::rollout(net, w, {&tr, 4}, nullptr, 0.99).total_latency);
}
BENCHMARK(BM_DracmGreedyEpisode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
