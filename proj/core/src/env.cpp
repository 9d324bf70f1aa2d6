#include "edgemig/env.hpp"

#include <string>

#include "edgemig/error.hpp"

namespace edgemig {
namespace {

void check_range(const Range& r, const char* name) {
  if (!(r.lo >= 0.0) || !(r.hi >= r.lo))
    throw Error(Errc::ConfigInvalid, std::string(name) + " must satisfy 0 <= lo <= hi");
}

Task sample_task(Rng& rng, const EnvConfig& cfg) {
  const double data = uniform(rng, cfg.data_bits.lo, cfg.data_bits.hi);
  const double kappa = uniform(rng, cfg.kappa_cycles_per_bit.lo, cfg.kappa_cycles_per_bit.hi);
  return Task::make(data, kappa);
}

}  // namespace

void EnvConfig::validate() const {
  if (!(f_cycles_per_s > 0.0)) throw Error(Errc::ConfigInvalid, "f must be positive");
  if (!(eta_bps > 0.0)) throw Error(Errc::ConfigInvalid, "eta must be positive");
  if (!(lambda_bh_s_per_hop >= 0.0)) throw Error(Errc::ConfigInvalid, "lambda_bh must be >= 0");
  check_range(mc_s_per_hop, "mc range");
  check_range(data_bits, "data range");
  check_range(kappa_cycles_per_bit, "kappa range");
  check_range(server_rate, "server rate range");
  if (!(user_rate >= 0.0)) throw Error(Errc::ConfigInvalid, "user rate must be >= 0");
  if (horizon < 1) throw Error(Errc::ConfigInvalid, "horizon must be >= 1");
  if (!(reward_scale > 0.0)) throw Error(Errc::ConfigInvalid, "reward scale must be positive");
}

std::vector<Task> sample_user_tasks(Rng& rng, const EnvConfig& cfg) {
  const int n = poisson(rng, cfg.user_rate);
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) tasks.push_back(sample_task(rng, cfg));
  return tasks;
}

std::vector<double> draw_server_rates(int servers, Rng& rng, const EnvConfig& cfg) {
  std::vector<double> rates(static_cast<std::size_t>(servers));
  for (auto& r : rates) r = uniform(rng, cfg.server_rate.lo, cfg.server_rate.hi);
  return rates;
}

double sample_background_load(double rate, Rng& rng, const EnvConfig& cfg) {
  const int n = poisson(rng, rate);
  double w = 0.0;
  for (int i = 0; i < n; ++i) w += sample_task(rng, cfg).cycles;
  return w;
}

std::vector<double> sample_server_loads(std::span<const double> rates, Rng& rng,
                                        const EnvConfig& cfg) {
  std::vector<double> loads;
  loads.reserve(rates.size());
  for (double r : rates) loads.push_back(sample_background_load(r, rng, cfg));
  return loads;
}

Observation OracleSnapshot::observation(int t) const {
  const auto i = static_cast<std::size_t>(t);
  return {user_cell[i], rho[i], c[i], data[i]};
}

SlotInputs OracleSnapshot::inputs(int t, ServerId action) const {
  const auto i = static_cast<std::size_t>(t);
  return {user_cell[i], rho[i],  c[i], data[i],
          server_loads[i][static_cast<std::size_t>(action.index)], mc[i]};
}

OracleSnapshot oracle_snapshot(const SlotTrace& trace, std::uint64_t seed, const GridSpec& grid,
                               const EnvConfig& cfg) {
  const int T = cfg.horizon;
  if (static_cast<int>(trace.slots.size()) < T)
    throw Error(Errc::TraceTooShort, trace.id + " has " + std::to_string(trace.slots.size()) +
                                         " slots, need " + std::to_string(T));
  const int M = grid.num_servers();

  OracleSnapshot s;
  s.user_cell.reserve(T);
  s.rate_point.reserve(T);
  s.rho.reserve(T);
  s.c.reserve(T);
  s.data.reserve(T);
  s.mc.reserve(T);
  s.user_tasks.reserve(T);
  s.server_loads.assign(static_cast<std::size_t>(T), std::vector<double>(M, 0.0));

  const std::uint64_t rate_key =
      cfg.server_rate_scope == RateScope::World ? cfg.world_seed : seed;
  std::vector<double> rates(static_cast<std::size_t>(M));
  std::vector<Rng> load_streams;
  load_streams.reserve(M);
  for (int m = 0; m < M; ++m) {
    Rng rate_rng = make_stream(rate_key, StreamPurpose::ServerRate, static_cast<std::uint64_t>(m));
    rates[m] = uniform(rate_rng, cfg.server_rate.lo, cfg.server_rate.hi);
    load_streams.push_back(make_stream(seed, StreamPurpose::ServerLoad, static_cast<std::uint64_t>(m)));
  }
  Rng task_rng = make_stream(seed, StreamPurpose::UserTasks);
  Rng mc_rng = make_stream(seed, StreamPurpose::MigrationCoeff);

  for (int t = 0; t < T; ++t) {
    const SlotPoint& p = trace.slots[static_cast<std::size_t>(t)];
    const ServerId u = locate_server(p.lat, p.lon, grid);
    const RatePoint rp = rate_point(p.lat, p.lon, grid);
    s.user_cell.push_back(u);
    s.rate_point.push_back(rp);
    s.rho.push_back(upload_rate(rp));

    auto tasks = sample_user_tasks(task_rng, cfg);
    double c = 0.0, data = 0.0;
    for (const Task& k : tasks) {
      c += k.cycles;
      data += k.data;
    }
    s.c.push_back(c);
    s.data.push_back(data);
    s.user_tasks.push_back(std::move(tasks));

    for (int m = 0; m < M; ++m)
      s.server_loads[t][m] = sample_background_load(rates[m], load_streams[m], cfg);
    s.mc.push_back(uniform(mc_rng, cfg.mc_s_per_hop.lo, cfg.mc_s_per_hop.hi));
  }
  return s;
}

std::uint64_t snapshot_digest(const OracleSnapshot& snap) noexcept {
  std::uint64_t h = 1469598103934665603ull;
  auto feed = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  auto feed_vec = [&feed](const std::vector<double>& v) {
    feed(v.data(), v.size() * sizeof(double));
  };
  for (ServerId u : snap.user_cell) feed(&u.index, sizeof(u.index));
  feed_vec(snap.rho);
  feed_vec(snap.c);
  feed_vec(snap.data);
  for (const auto& row : snap.server_loads) feed_vec(row);
  feed_vec(snap.mc);
  return h;
}

Env::Env(GridSpec grid, EnvConfig cfg) : grid_(grid), cfg_(cfg) {
  grid_.validate();
  cfg_.validate();
}

Observation Env::reset(const SlotTrace& trace, std::uint64_t seed) {
  snap_ = oracle_snapshot(trace, seed, grid_, cfg_);
  slot_ = 0;
  serving_ = snap_.user_cell.front();
  started_ = true;
  return snap_.observation(0);
}

StepOutcome Env::step(ServerId action) {
  if (!started_) throw Error(Errc::NotInitialized, "step before reset");
  if (done()) throw Error(Errc::EpisodeFinished, "episode already has " +
                                                     std::to_string(cfg_.horizon) + " steps");
  check_server(action, grid_);

  StepOutcome out;
  out.breakdown = slot_cost(serving_, action, snap_.inputs(slot_, action), grid_, cfg_);
  out.reward = -out.breakdown.total() / cfg_.reward_scale;
  serving_ = action;
  ++slot_;
  out.done = done();
  out.obs = snap_.observation(out.done ? cfg_.horizon - 1 : slot_);
  return out;
}

EnvState Env::state() const {
  if (!started_) throw Error(Errc::NotInitialized, "state before reset");
  const int t = done() ? cfg_.horizon - 1 : slot_;
  const auto i = static_cast<std::size_t>(t);
  return {slot_,
          snap_.user_cell[i],
          snap_.rate_point[i],
          serving_,
          snap_.server_loads[i],
          snap_.mc[i],
          snap_.user_tasks[i]};
}

}  // namespace edgemig
