#include "edgemig/checks.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "edgemig/agents.hpp"
#include "edgemig/dqlm.hpp"
#include "edgemig/dracm.hpp"
#include "edgemig/optim.hpp"
#include "edgemig/traces.hpp"

namespace edgemig::checks {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

CheckResult optim_brute_force(std::uint64_t seed) {
  Rng rng = make_stream(seed, StreamPurpose::Check, 1);
  int mismatches = 0;
  for (int inst = 0; inst < 50; ++inst) {
    agents::CostTensor ct;
    ct.horizon = 5;
    ct.servers = 3;
    ct.a_init = ServerId(inst % 3);
    ct.step_cost.resize(5 * 3 * 3);
    for (double& c : ct.step_cost) c = uniform(rng, 0.0, 10.0);
    const auto sol = agents::optim_solve(ct);

    double best = std::numeric_limits<double>::infinity();
    std::vector<ServerId> seq(5);
    for (int code = 0; code < 243; ++code) {
      int x = code;
      for (int t = 0; t < 5; ++t, x /= 3) seq[static_cast<std::size_t>(t)] = ServerId(x % 3);
      best = std::min(best, agents::sequence_cost(ct, seq));
    }
    if (std::abs(best - sol.total) > 1e-9 * std::max(1.0, best) ||
        std::abs(agents::sequence_cost(ct, sol.actions) - sol.total) > 1e-9 * std::max(1.0, best))
      ++mismatches;
  }
  return {"optim_matches_enumeration", mismatches == 0, std::to_string(mismatches) + " of 50 differ"};
}

CheckResult gae_identities() {
  const std::vector<double> r{1.0, -0.5, 2.0, 0.25};
  const std::vector<double> v{0.3, -0.1, 0.7, 0.2, 0.0};
  const double g = 0.9;
  const auto zero = dracm::compute_gae(r, v, g, 0.0);
  bool ok = zero.advantages == zero.deltas;
  const auto one = dracm::compute_gae(r, v, g, 1.0);
  double worst = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    double ret = 0.0, disc = 1.0;
    for (std::size_t k = t; k < r.size(); ++k, disc *= g) ret += disc * r[k];
    worst = std::max(worst, std::abs(one.advantages[t] - (ret - v[t])));
  }
  ok = ok && worst < 1e-10;
  const auto hand = dracm::compute_gae(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 0.0, 0.0}, 1.0, 1.0);
  ok = ok && hand.advantages == std::vector<double>{2.0, 1.0};
  return {"gae_identities", ok, "lambda=1 max error " + num(worst)};
}

CheckResult surrogate_identities() {
  const double a = dracm::clipped_surrogate(1.5, 1.0, 0.2);
  const double b = dracm::clipped_surrogate(0.5, -1.0, 0.2);
  const bool ok = std::abs(a - 1.2) < 1e-12 && std::abs(b + 0.8) < 1e-12;
  return {"clipped_surrogate_hand_cases", ok, num(a) + ", " + num(b)};
}

struct Toy {
  World world;
  std::vector<SlotTrace> traces;
};

Toy toy_world(std::uint64_t seed, int horizon) {
  Toy toy;
  toy.world.grid = GridSpec::synthetic(1, 3);
  toy.world.env.horizon = horizon;
  for (int i = 0; i < 3; ++i)
    toy.traces.push_back(traces::synth_trace(derive_seed(seed, StreamPurpose::Check, 7, i), toy.world.grid,
                                             horizon, {}));
  return toy;
}

CheckResult dracm_gradient(std::uint64_t seed) {
  const Toy toy = toy_world(seed, 2);
  dracm::DracmNet net({3, 2, 4, 4}, seed);
  Rng rng = make_stream(seed, StreamPurpose::Check, 2);
  std::vector<dracm::Trajectory> trajs;
  for (const auto& t : toy.traces) trajs.push_back(dracm::rollout(net, toy.world, {&t, 11}, &rng, 0.99));
  std::vector<std::vector<double>> adv{{0.5, -1.0}, {1.5, 0.2}, {-0.3, 0.8}};
  std::vector<const dracm::Trajectory*> batch;
  std::vector<const std::vector<double>*> adv_ptr;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    batch.push_back(&trajs[i]);
    adv_ptr.push_back(&adv[i]);
  }
  dracm::TrainerConfig cfg;
  const auto res = nn::finite_diff_check(
      [&](nn::ParamStore&, bool with_grad) { return dracm::dracm_loss(net, batch, adv_ptr, cfg, with_grad).total; },
      net.params);
  return {"dracm_loss_gradient", res.max_rel_error < 1e-4,
          "max rel error " + num(res.max_rel_error) + " at " + res.worst_param};
}

CheckResult dqlm_gradient(std::uint64_t seed) {
  const Toy toy = toy_world(seed, 3);
  dqlm::QNet net({3, 2, 4, 4}, seed);
  dqlm::QNet target({3, 2, 4, 4}, seed + 1);
  Rng rng = make_stream(seed, StreamPurpose::Check, 3);
  std::vector<dracm::Trajectory> trajs;
  for (const auto& t : toy.traces) trajs.push_back(dqlm::rollout(net, toy.world, {&t, 5}, 0.5, rng, 0.9));
  std::vector<const dracm::Trajectory*> batch;
  for (const auto& t : trajs) batch.push_back(&t);
  const auto res = nn::finite_diff_check(
      [&](nn::ParamStore&, bool with_grad) { return dqlm::td_loss(net, target, batch, 0.9, with_grad); },
      net.params);
  return {"dqlm_td_gradient", res.max_rel_error < 1e-4,
          "max rel error " + num(res.max_rel_error) + " at " + res.worst_param};
}

CheckResult sampling_calibration(std::uint64_t seed) {
  EnvConfig cfg;
  Rng rng = make_stream(seed, StreamPurpose::Check, 4);
  const int n = 20000;
  double count = 0.0, data_lo = 1e300, data_hi = -1e300;
  for (int i = 0; i < n; ++i) {
    const auto tasks = sample_user_tasks(rng, cfg);
    count += static_cast<double>(tasks.size());
    for (const auto& t : tasks) {
      data_lo = std::min(data_lo, t.data);
      data_hi = std::max(data_hi, t.data);
    }
  }
  const double mean = count / n;
  const double tol = 4.0 * std::sqrt(cfg.user_rate / n);
  const bool ok = std::abs(mean - cfg.user_rate) < tol && data_lo >= cfg.data_bits.lo && data_hi <= cfg.data_bits.hi;
  return {"task_sampling_calibration", ok, "mean tasks/slot " + num(mean)};
}

CheckResult optim_dominance(std::uint64_t seed) {
  World world{GridSpec::synthetic(4, 4), EnvConfig{}};
  world.env.horizon = 30;
  std::vector<SlotTrace> pool;
  for (int i = 0; i < 4; ++i)
    pool.push_back(traces::synth_trace(derive_seed(seed, StreamPurpose::Check, 8, i), world.grid, 30, {}));
  agents::NeverMigrate nm;
  agents::AlwaysMigrate am;
  agents::Mabts mab(world.grid.num_servers(), seed);
  agents::Optim opt;
  int violations = 0;
  for (const auto& t : pool) {
    const EpisodeSpec ep{&t, derive_seed(seed, StreamPurpose::Check, 9, 0)};
    const double best = agents::run_episode(opt, world, ep).total_latency;
    for (agents::Agent* a : std::initializer_list<agents::Agent*>{&nm, &am, &mab})
      if (agents::run_episode(*a, world, ep).total_latency < best) ++violations;
  }
  return {"optim_dominance", violations == 0, std::to_string(violations) + " violations"};
}

}  // namespace

std::vector<CheckResult> run_all(std::uint64_t seed) {
  std::vector<std::function<CheckResult()>> suite{
      [&] { return optim_brute_force(seed); }, gae_identities, surrogate_identities,
      [&] { return dracm_gradient(seed); },    [&] { return dqlm_gradient(seed); },
      [&] { return sampling_calibration(seed); }, [&] { return optim_dominance(seed); },
  };
  std::vector<CheckResult> out;
  for (const auto& check : suite) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace edgemig::checks
