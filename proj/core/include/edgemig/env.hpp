#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgemig/rng.hpp"
#include "edgemig/topology.hpp"
#include "edgemig/traces.hpp"

namespace edgemig {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const noexcept { return 0.5 * (lo + hi); }
};

/// Whether each server's background task rate is a property of the world
/// (fixed across episodes) or redrawn at every episode.
enum class RateScope { World, Episode };

struct EnvConfig {
  double f_cycles_per_s = 1.28e11;
  double eta_bps = 5e8;
  double lambda_bh_s_per_hop = 0.02;
  Range mc_s_per_hop{1.0, 3.0};
  Range data_bits{4e5, 4e7};
  Range kappa_cycles_per_bit{200.0, 10000.0};
  double user_rate = 2.0;         // tasks per slot
  Range server_rate{5.0, 20.0};  // tasks per slot
  int horizon = 100;
  double reward_scale = 10.0;
  RateScope server_rate_scope = RateScope::World;
  std::uint64_t world_seed = 0;

  void validate() const;
};

struct Task {
  double data = 0.0;   // bits
  double kappa = 0.0;  // cycles per bit
  double cycles = 0.0;

  static Task make(double data, double kappa) { return {data, kappa, data * kappa}; }
};

/// Per-slot latency, seconds.
struct CostBreakdown {
  double migration = 0.0;
  double computation = 0.0;
  double access = 0.0;
  double backhaul = 0.0;

  double total() const noexcept { return migration + computation + access + backhaul; }
  CostBreakdown& operator+=(const CostBreakdown& o) noexcept {
    migration += o.migration;
    computation += o.computation;
    access += o.access;
    backhaul += o.backhaul;
    return *this;
  }
};

// Latency components.
double migration_delay(int hops, double mc);
double computation_delay(double cycles, double load, double f);
double access_delay(double data, double rho);
double backhaul_delay(int hops, double data, double eta, double lambda_bh);

/// Exogenous inputs of one slot, everything except the decision.
struct SlotInputs {
  ServerId user;
  double rho = 0.0;
  double cycles = 0.0;
  double data = 0.0;
  double load_at_action = 0.0;
  double mc = 0.0;
};

CostBreakdown slot_cost(ServerId prev, ServerId action, const SlotInputs& in, const GridSpec& grid,
                        const EnvConfig& cfg);

std::vector<Task> sample_user_tasks(Rng& rng, const EnvConfig& cfg);
std::vector<double> draw_server_rates(int servers, Rng& rng, const EnvConfig& cfg);
/// Background work queued at one server during one slot.
double sample_background_load(double rate, Rng& rng, const EnvConfig& cfg);
std::vector<double> sample_server_loads(std::span<const double> rates, Rng& rng,
                                        const EnvConfig& cfg);

struct Observation {
  ServerId u;
  double rho = 0.0;
  double c = 0.0;
  double data = 0.0;
  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Every random quantity of one episode, committed up front. Both the live
/// environment and the offline optimum read from this.
struct OracleSnapshot {
  std::vector<ServerId> user_cell;
  std::vector<RatePoint> rate_point;
  std::vector<double> rho;
  std::vector<double> c;
  std::vector<double> data;
  std::vector<std::vector<double>> server_loads;  // [slot][server]
  std::vector<double> mc;
  std::vector<std::vector<Task>> user_tasks;

  int horizon() const noexcept { return static_cast<int>(rho.size()); }
  Observation observation(int t) const;
  SlotInputs inputs(int t, ServerId action) const;
};

OracleSnapshot oracle_snapshot(const SlotTrace& trace, std::uint64_t seed, const GridSpec& grid,
                               const EnvConfig& cfg);

/// FNV-1a over the snapshot's bytes; equal digests mean equal episodes.
std::uint64_t snapshot_digest(const OracleSnapshot& snap) noexcept;

struct EnvState {
  int slot = 0;
  ServerId user_cell;
  RatePoint user_rate_point;
  ServerId serving;
  std::span<const double> server_loads;
  double mc = 0.0;
  std::span<const Task> user_tasks;
};

struct StepOutcome {
  Observation obs;  // next observation; repeats the last one when done
  double reward = 0.0;
  bool done = false;
  CostBreakdown breakdown;
};

class Env {
 public:
  Env(GridSpec grid, EnvConfig cfg);

  Observation reset(const SlotTrace& trace, std::uint64_t seed);
  StepOutcome step(ServerId action);

  bool done() const noexcept { return slot_ >= cfg_.horizon; }
  EnvState state() const;
  const OracleSnapshot& snapshot() const noexcept { return snap_; }
  const GridSpec& grid() const noexcept { return grid_; }
  const EnvConfig& config() const noexcept { return cfg_; }

 private:
  GridSpec grid_;
  EnvConfig cfg_;
  OracleSnapshot snap_;
  int slot_ = 0;
  ServerId serving_;
  bool started_ = false;
};

}  // namespace edgemig
