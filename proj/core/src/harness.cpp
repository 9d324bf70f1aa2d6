#include "edgemig/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "edgemig/agents.hpp"
#include "edgemig/checkpoint.hpp"
#include "edgemig/dqlm.hpp"
#include "edgemig/error.hpp"
#include "edgemig/traces.hpp"

namespace edgemig::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return "none";
    case SweepAxis::UserRate: return "user_rate_tasks_per_slot";
    case SweepAxis::KappaMidpoint: return "kappa_midpoint_cycles_per_bit";
    case SweepAxis::MigrationCoeff: return "mc_s_per_hop";
  }
  return "none";
}

GridChoice parse_grid(const std::string& name) {
  if (name == "rome") return GridChoice::Rome;
  if (name == "sf" || name == "san_francisco") return GridChoice::SanFrancisco;
  if (name == "synthetic") return GridChoice::Synthetic;
  throw Error(Errc::ConfigInvalid, "unknown grid '" + name + "' (rome, sf, synthetic)");
}

namespace {

std::string grid_name(GridChoice g) {
  switch (g) {
    case GridChoice::Rome: return "rome";
    case GridChoice::SanFrancisco: return "sf";
    case GridChoice::Synthetic: return "synthetic";
  }
  return "synthetic";
}

}  // namespace

std::vector<double> default_sweep_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return {};
    case SweepAxis::UserRate: return {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    case SweepAxis::KappaMidpoint: return {5100.0, 6000.0, 7000.0, 8000.0, 9000.0, 10000.0};
    case SweepAxis::MigrationCoeff: return {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
  }
  return {};
}

EnvConfig apply_sweep(EnvConfig env, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::None: break;
    case SweepAxis::UserRate: env.user_rate = value; break;
    case SweepAxis::KappaMidpoint: {
      const double half = 0.5 * (env.kappa_cycles_per_bit.hi - env.kappa_cycles_per_bit.lo);
      env.kappa_cycles_per_bit = {value - half, value + half};
      break;
    }
    case SweepAxis::MigrationCoeff: env.mc_s_per_hop = {value, value}; break;
  }
  return env;
}

// ---- config ---------------------------------------------------------------

namespace {

struct Reader {
  const json& j;

  double number(const std::string& key) const {
    if (!j.is_number()) throw Error(Errc::ConfigInvalid, key + " must be a number");
    return j.get<double>();
  }
  long integer(const std::string& key) const {
    if (!j.is_number_integer()) throw Error(Errc::ConfigInvalid, key + " must be an integer");
    return j.get<long>();
  }
  std::string str(const std::string& key) const {
    if (!j.is_string()) throw Error(Errc::ConfigInvalid, key + " must be a string");
    return j.get<std::string>();
  }
  bool boolean(const std::string& key) const {
    if (!j.is_boolean()) throw Error(Errc::ConfigInvalid, key + " must be true or false");
    return j.get<bool>();
  }
};

using Setter = std::function<void(ExperimentConfig&, const Reader&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](auto& c, const Reader& r, const auto& k) {
         const long v = r.integer(k);
         if (v < 0) throw Error(Errc::ConfigInvalid, "seed must be >= 0");
         c.seed = static_cast<std::uint64_t>(v);
       }},
      {"grid", [](auto& c, const Reader& r, const auto& k) { c.grid = parse_grid(r.str(k)); }},
      {"grid_rows", [](auto& c, const Reader& r, const auto& k) { c.grid_rows = static_cast<int>(r.integer(k)); }},
      {"grid_cols", [](auto& c, const Reader& r, const auto& k) { c.grid_cols = static_cast<int>(r.integer(k)); }},
      {"f_cycles_per_s", [](auto& c, const Reader& r, const auto& k) { c.env.f_cycles_per_s = r.number(k); }},
      {"eta_bps", [](auto& c, const Reader& r, const auto& k) { c.env.eta_bps = r.number(k); }},
      {"lambda_bh_s_per_hop", [](auto& c, const Reader& r, const auto& k) { c.env.lambda_bh_s_per_hop = r.number(k); }},
      {"mc_min_s_per_hop", [](auto& c, const Reader& r, const auto& k) { c.env.mc_s_per_hop.lo = r.number(k); }},
      {"mc_max_s_per_hop", [](auto& c, const Reader& r, const auto& k) { c.env.mc_s_per_hop.hi = r.number(k); }},
      {"data_min_bits", [](auto& c, const Reader& r, const auto& k) { c.env.data_bits.lo = r.number(k); }},
      {"data_max_bits", [](auto& c, const Reader& r, const auto& k) { c.env.data_bits.hi = r.number(k); }},
      {"kappa_min_cycles_per_bit", [](auto& c, const Reader& r, const auto& k) { c.env.kappa_cycles_per_bit.lo = r.number(k); }},
      {"kappa_max_cycles_per_bit", [](auto& c, const Reader& r, const auto& k) { c.env.kappa_cycles_per_bit.hi = r.number(k); }},
      {"user_rate_tasks_per_slot", [](auto& c, const Reader& r, const auto& k) { c.env.user_rate = r.number(k); }},
      {"server_rate_min_tasks_per_slot", [](auto& c, const Reader& r, const auto& k) { c.env.server_rate.lo = r.number(k); }},
      {"server_rate_max_tasks_per_slot", [](auto& c, const Reader& r, const auto& k) { c.env.server_rate.hi = r.number(k); }},
      {"horizon_slots", [](auto& c, const Reader& r, const auto& k) { c.env.horizon = static_cast<int>(r.integer(k)); }},
      {"reward_scale", [](auto& c, const Reader& r, const auto& k) { c.env.reward_scale = r.number(k); }},
      {"server_rate_scope", [](auto& c, const Reader& r, const auto& k) {
         const std::string s = r.str(k);
         if (s == "world") c.env.server_rate_scope = RateScope::World;
         else if (s == "episode") c.env.server_rate_scope = RateScope::Episode;
         else throw Error(Errc::ConfigInvalid, "server_rate_scope must be world or episode");
       }},
      {"world_seed", [](auto& c, const Reader& r, const auto& k) { c.env.world_seed = static_cast<std::uint64_t>(r.integer(k)); }},
      {"gamma", [](auto& c, const Reader& r, const auto& k) { c.trainer.gamma = r.number(k); }},
      {"lambda", [](auto& c, const Reader& r, const auto& k) { c.trainer.lambda = r.number(k); }},
      {"clip_eps", [](auto& c, const Reader& r, const auto& k) { c.trainer.clip_eps = r.number(k); }},
      {"entropy_coef", [](auto& c, const Reader& r, const auto& k) { c.trainer.entropy_coef = r.number(k); }},
      {"learning_rate", [](auto& c, const Reader& r, const auto& k) { c.trainer.learning_rate = r.number(k); }},
      {"episodes_per_iteration", [](auto& c, const Reader& r, const auto& k) { c.trainer.episodes_per_iteration = static_cast<int>(r.integer(k)); }},
      {"update_epochs", [](auto& c, const Reader& r, const auto& k) { c.trainer.update_epochs = static_cast<int>(r.integer(k)); }},
      {"minibatch_trajectories", [](auto& c, const Reader& r, const auto& k) { c.trainer.minibatch_trajectories = static_cast<int>(r.integer(k)); }},
      {"iterations", [](auto& c, const Reader& r, const auto& k) { c.trainer.iterations = static_cast<int>(r.integer(k)); }},
      {"normalize_advantages", [](auto& c, const Reader& r, const auto& k) { c.trainer.normalize_advantages = r.boolean(k); }},
      {"embed_dim", [](auto& c, const Reader& r, const auto& k) { c.embed_dim = static_cast<int>(r.integer(k)); }},
      {"lstm_hidden", [](auto& c, const Reader& r, const auto& k) { c.lstm_hidden = static_cast<int>(r.integer(k)); }},
      {"head_hidden", [](auto& c, const Reader& r, const auto& k) { c.head_hidden = static_cast<int>(r.integer(k)); }},
      {"agents", [](auto& c, const Reader& r, const auto& k) {
         if (!r.j.is_array()) throw Error(Errc::ConfigInvalid, k + " must be an array of names");
         c.agents.clear();
         for (const auto& a : r.j) c.agents.push_back(Reader{a}.str(k));
       }},
      {"trace_csv", [](auto& c, const Reader& r, const auto& k) { c.trace_csv = r.str(k); }},
      {"synthetic_traces", [](auto& c, const Reader& r, const auto& k) { c.synthetic_traces = static_cast<int>(r.integer(k)); }},
      {"n_train", [](auto& c, const Reader& r, const auto& k) { c.n_train = static_cast<int>(r.integer(k)); }},
      {"n_test", [](auto& c, const Reader& r, const auto& k) { c.n_test = static_cast<int>(r.integer(k)); }},
      {"eval_seeds_per_trace", [](auto& c, const Reader& r, const auto& k) { c.eval_seeds_per_trace = static_cast<int>(r.integer(k)); }},
      {"mabts_warmup_episodes", [](auto& c, const Reader& r, const auto& k) { c.mabts_warmup_episodes = static_cast<int>(r.integer(k)); }},
      {"checkpoint_dir", [](auto& c, const Reader& r, const auto& k) { c.checkpoint_dir = r.str(k); }},
  };
  return table;
}

const std::map<std::string, SweepAxis>& sweep_keys() {
  static const std::map<std::string, SweepAxis> keys = {
      {"sweep_user_rate_tasks_per_slot", SweepAxis::UserRate},
      {"sweep_kappa_midpoint_cycles_per_bit", SweepAxis::KappaMidpoint},
      {"sweep_mc_s_per_hop", SweepAxis::MigrationCoeff},
  };
  return keys;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::ConfigInvalid, "config must be a JSON object");
  ExperimentConfig c;
  bool sweep_seen = false;
  for (const auto& [key, val] : j.items()) {
    if (auto it = setters().find(key); it != setters().end()) {
      it->second(c, Reader{val}, key);
      continue;
    }
    if (auto it = sweep_keys().find(key); it != sweep_keys().end()) {
      if (sweep_seen) throw Error(Errc::ConfigInvalid, "at most one sweep axis per experiment");
      sweep_seen = true;
      c.sweep = it->second;
      if (val.is_boolean()) {
        if (val.get<bool>()) c.sweep_values = default_sweep_values(c.sweep);
        else c.sweep = SweepAxis::None;
      } else if (val.is_array()) {
        for (const auto& v : val) c.sweep_values.push_back(Reader{v}.number(key));
      } else {
        throw Error(Errc::ConfigInvalid, key + " must be true or an array of values");
      }
      continue;
    }
    throw Error(Errc::ConfigInvalid, "unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigInvalid, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["grid"] = grid_name(grid);
  j["grid_rows"] = grid_rows;
  j["grid_cols"] = grid_cols;
  j["f_cycles_per_s"] = env.f_cycles_per_s;
  j["eta_bps"] = env.eta_bps;
  j["lambda_bh_s_per_hop"] = env.lambda_bh_s_per_hop;
  j["mc_min_s_per_hop"] = env.mc_s_per_hop.lo;
  j["mc_max_s_per_hop"] = env.mc_s_per_hop.hi;
  j["data_min_bits"] = env.data_bits.lo;
  j["data_max_bits"] = env.data_bits.hi;
  j["kappa_min_cycles_per_bit"] = env.kappa_cycles_per_bit.lo;
  j["kappa_max_cycles_per_bit"] = env.kappa_cycles_per_bit.hi;
  j["user_rate_tasks_per_slot"] = env.user_rate;
  j["server_rate_min_tasks_per_slot"] = env.server_rate.lo;
  j["server_rate_max_tasks_per_slot"] = env.server_rate.hi;
  j["horizon_slots"] = env.horizon;
  j["reward_scale"] = env.reward_scale;
  j["server_rate_scope"] = env.server_rate_scope == RateScope::World ? "world" : "episode";
  j["world_seed"] = env.world_seed;
  j["gamma"] = trainer.gamma;
  j["lambda"] = trainer.lambda;
  j["clip_eps"] = trainer.clip_eps;
  j["entropy_coef"] = trainer.entropy_coef;
  j["learning_rate"] = trainer.learning_rate;
  j["episodes_per_iteration"] = trainer.episodes_per_iteration;
  j["update_epochs"] = trainer.update_epochs;
  j["minibatch_trajectories"] = trainer.minibatch_trajectories;
  j["iterations"] = trainer.iterations;
  j["normalize_advantages"] = trainer.normalize_advantages;
  j["embed_dim"] = embed_dim;
  j["lstm_hidden"] = lstm_hidden;
  j["head_hidden"] = head_hidden;
  j["agents"] = agents;
  j["trace_csv"] = trace_csv.string();
  j["synthetic_traces"] = synthetic_traces;
  j["n_train"] = n_train;
  j["n_test"] = n_test;
  j["eval_seeds_per_trace"] = eval_seeds_per_trace;
  j["mabts_warmup_episodes"] = mabts_warmup_episodes;
  j["checkpoint_dir"] = checkpoint_dir.string();
  for (const auto& [key, axis] : sweep_keys())
    if (axis == sweep) j[key] = sweep_values;
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  grid_spec().validate();
  env.validate();
  trainer.validate();
  if (embed_dim < 1 || lstm_hidden < 1 || head_hidden < 1)
    throw Error(Errc::ConfigInvalid, "network sizes must be positive");
  if (agents.empty()) throw Error(Errc::ConfigInvalid, "agent list is empty");
  for (const auto& a : agents)
    if (std::find(kAllAgents.begin(), kAllAgents.end(), a) == kAllAgents.end())
      throw Error(Errc::ConfigInvalid, "unknown agent '" + a + "'");
  if (synthetic_traces < 0 || n_train < 0 || n_test < 0 || eval_seeds_per_trace < 1)
    throw Error(Errc::ConfigInvalid, "trace counts must be non-negative and seeds per trace >= 1");
  if (sweep != SweepAxis::None && sweep_values.empty())
    throw Error(Errc::ConfigInvalid, "sweep axis given without values");
  for (double v : sweep_values)
    if (!std::isfinite(v)) throw Error(Errc::ConfigInvalid, "sweep values must be finite");
  for (double v : sweep_values) apply_sweep(env, sweep, v).validate();
}

GridSpec ExperimentConfig::grid_spec() const {
  switch (grid) {
    case GridChoice::Rome: return GridSpec::rome();
    case GridChoice::SanFrancisco: return GridSpec::san_francisco();
    case GridChoice::Synthetic: return GridSpec::synthetic(grid_rows, grid_cols);
  }
  return GridSpec::synthetic(grid_rows, grid_cols);
}

dracm::NetShape ExperimentConfig::net_shape() const {
  return {grid_spec().num_servers(), embed_dim, lstm_hidden, head_hidden};
}

bool ExperimentConfig::has_agent(const std::string& name) const {
  return std::find(agents.begin(), agents.end(), name) != agents.end();
}

// ---- comparison -------------------------------------------------------------

std::vector<ComparisonRow> compare_agents(const World& world, std::span<agents::Agent* const> roster,
                                          std::span<const EpisodeSpec> episodes) {
  if (episodes.empty()) throw Error(Errc::EmptyTestSet, "no evaluation episodes");
  if (roster.empty()) throw Error(Errc::ConfigInvalid, "no agents to compare");

  agents::Optim reference;
  std::vector<double> optim_latency;
  std::vector<std::uint64_t> digests;
  for (const auto& ep : episodes) {
    const auto r = agents::run_episode(reference, world, ep);
    optim_latency.push_back(r.total_latency);
    digests.push_back(r.snapshot_digest);
  }
  const double optim_mean = dracm::summarize(optim_latency, {}).mean_latency_s;

  std::vector<ComparisonRow> rows;
  for (agents::Agent* agent : roster) {
    std::vector<double> lat;
    std::vector<CostBreakdown> bd;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      const auto r = agents::run_episode(*agent, world, episodes[i]);
      if (r.snapshot_digest != digests[i])
        throw Error(Errc::FairnessViolation, agent->name() + " saw a different episode " + std::to_string(i));
      lat.push_back(r.total_latency);
      bd.push_back(r.total_breakdown);
    }
    const dracm::EvalReport rep = dracm::summarize(lat, bd);
    ComparisonRow row;
    row.agent = agent->name();
    row.mean_latency_s = rep.mean_latency_s;
    row.std_latency_s = rep.std_latency_s;
    row.mean_breakdown = rep.mean_breakdown;
    row.optimality_gap = optim_mean > 0.0 ? (rep.mean_latency_s - optim_mean) / optim_mean : 0.0;
    row.episode_latency = std::move(lat);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.mean_latency_s != b.mean_latency_s) return a.mean_latency_s < b.mean_latency_s;
    return a.agent < b.agent;
  });
  return rows;
}

// ---- traces -----------------------------------------------------------------

std::vector<SlotTrace> load_traces(const ExperimentConfig& cfg) {
  const GridSpec grid = cfg.grid_spec();
  std::vector<SlotTrace> all;
  if (!cfg.trace_csv.empty()) {
    if (!fs::exists(cfg.trace_csv))
      throw Error(Errc::TraceSourceMissing, "trace file " + cfg.trace_csv.string() + " not found");
    all = traces::read_slot_traces(cfg.trace_csv);
  } else {
    for (int i = 0; i < cfg.synthetic_traces; ++i)
      all.push_back(traces::synth_trace(
          derive_seed(cfg.seed, StreamPurpose::SyntheticTrace, static_cast<std::uint64_t>(i)), grid,
          cfg.env.horizon, {}));
  }
  std::vector<SlotTrace> usable;
  for (auto& t : all) {
    if (static_cast<int>(t.slots.size()) < cfg.env.horizon) continue;
    bool inside = true;
    for (const auto& p : t.slots) inside = inside && grid.contains(p.lat, p.lon);
    if (inside) usable.push_back(std::move(t));
  }
  if (usable.size() < 2)
    throw Error(Errc::TraceSourceMissing, "fewer than two usable traces cover the horizon");
  return usable;
}

// ---- output -----------------------------------------------------------------

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
}

std::string suffix(const ExperimentConfig& cfg, std::size_t point) {
  return cfg.sweep == SweepAxis::None ? std::string() : "_" + std::to_string(point);
}

constexpr const char* kComparisonHeader =
    "sweep_axis,sweep_value,agent,mean_latency_s,std_latency_s,migration_s,computation_s,access_s,"
    "backhaul_s,optimality_gap";

}  // namespace

void write_comparison_csv(const fs::path& path, std::span<const SweepPointResult> points) {
  std::ostringstream os;
  os << kComparisonHeader << '\n';
  for (const auto& p : points) {
    const std::string value = p.axis == SweepAxis::None ? "" : fmt(p.value);
    for (const auto& r : p.rows) {
      os << to_string(p.axis) << ',' << value << ',' << r.agent << ',' << fmt(r.mean_latency_s) << ','
         << fmt(r.std_latency_s) << ',' << fmt(r.mean_breakdown.migration) << ','
         << fmt(r.mean_breakdown.computation) << ',' << fmt(r.mean_breakdown.access) << ','
         << fmt(r.mean_breakdown.backhaul) << ',' << fmt(r.optimality_gap) << '\n';
    }
  }
  write_text(path, os.str());
}

RunSummary run(const ExperimentConfig& cfg, const fs::path& out, std::ostream* log, bool train_only) {
  cfg.validate();
  fs::create_directories(out);
  RunSummary summary;

  std::vector<SlotTrace> pool = load_traces(cfg);
  const std::size_t n_train = cfg.n_train > 0 ? static_cast<std::size_t>(cfg.n_train)
                                              : std::max<std::size_t>(1, pool.size() * 4 / 5);
  if (n_train >= pool.size())
    throw Error(Errc::TraceSourceMissing, "no traces left for testing");
  const std::size_t n_test = cfg.n_test > 0 ? static_cast<std::size_t>(cfg.n_test) : pool.size() - n_train;
  if (n_train + n_test > pool.size())
    throw Error(Errc::TraceSourceMissing, "not enough traces for the requested split");
  const traces::Split split = traces::split_train_test(std::move(pool), n_train, n_test);

  const fs::path echo = out / "config_echo.json";
  write_text(echo, cfg.to_json_text());
  summary.written.push_back(echo);

  std::vector<double> values = cfg.sweep == SweepAxis::None ? std::vector<double>{0.0} : cfg.sweep_values;
  const dracm::NetShape shape = cfg.net_shape();
  const std::vector<EpisodeSpec> test_eps =
      evaluation_episodes(split.test, derive_seed(cfg.seed, StreamPurpose::EpisodeSampler, ~0ull),
                          cfg.eval_seeds_per_trace);

  for (std::size_t k = 0; k < values.size(); ++k) {
    const World world{cfg.grid_spec(), apply_sweep(cfg.env, cfg.sweep, values[k])};
    const TraceSampler sampler(split.train, cfg.seed);
    const std::string sfx = suffix(cfg, k);
    if (log && cfg.sweep != SweepAxis::None)
      *log << "sweep " << to_string(cfg.sweep) << " = " << fmt(values[k]) << '\n';

    std::unique_ptr<dracm::Trainer> dracm_trainer;
    if (cfg.has_agent("DRACM")) {
      dracm_trainer = std::make_unique<dracm::Trainer>(world, shape, cfg.trainer, cfg.seed);
      const fs::path ckpt = cfg.checkpoint_dir / ("dracm" + sfx);
      if (!cfg.checkpoint_dir.empty() && fs::exists(ckpt.string() + ".bin")) {
        load_checkpoint(ckpt, dracm_trainer->net().params);
      } else {
        std::ostringstream m;
        m << "iteration,mean_latency_s,actor_loss,critic_loss,entropy,wall_s\n";
        for (int it = 0; it < cfg.trainer.iterations; ++it) {
          const auto rep = dracm_trainer->train_iteration(sampler);
          m << rep.iteration << ',' << fmt(rep.mean_latency_s) << ',' << fmt(rep.actor_loss) << ','
            << fmt(rep.critic_loss) << ',' << fmt(rep.entropy) << ',' << fmt(rep.wall_s) << '\n';
          if (log && (it % 10 == 0 || it + 1 == cfg.trainer.iterations))
            *log << "DRACM iter " << rep.iteration << " latency " << fmt(rep.mean_latency_s) << " s\n";
        }
        const fs::path metrics = out / ("metrics_dracm" + sfx + ".csv");
        write_text(metrics, m.str());
        save_checkpoint(out / ("dracm" + sfx), dracm_trainer->net().params);
        summary.written.push_back(metrics);
      }
    }

    std::unique_ptr<dqlm::Trainer> dqlm_trainer;
    if (cfg.has_agent("DQLM")) {
      dqlm_trainer = std::make_unique<dqlm::Trainer>(world, shape, cfg.trainer, cfg.seed);
      const fs::path ckpt = cfg.checkpoint_dir / ("dqlm" + sfx);
      if (!cfg.checkpoint_dir.empty() && fs::exists(ckpt.string() + ".bin")) {
        load_checkpoint(ckpt, dqlm_trainer->net().params);
      } else {
        std::ostringstream m;
        m << "iteration,mean_latency_s,td_loss,epsilon,wall_s\n";
        for (int it = 0; it < cfg.trainer.iterations; ++it) {
          const auto rep = dqlm_trainer->train_iteration(sampler);
          m << rep.iteration << ',' << fmt(rep.mean_latency_s) << ',' << fmt(rep.td_loss) << ','
            << fmt(rep.epsilon) << ',' << fmt(rep.wall_s) << '\n';
          if (log && (it % 10 == 0 || it + 1 == cfg.trainer.iterations))
            *log << "DQLM iter " << rep.iteration << " latency " << fmt(rep.mean_latency_s) << " s\n";
        }
        const fs::path metrics = out / ("metrics_dqlm" + sfx + ".csv");
        write_text(metrics, m.str());
        save_checkpoint(out / ("dqlm" + sfx), dqlm_trainer->net().params);
        summary.written.push_back(metrics);
      }
    }
    if (train_only) continue;

    std::vector<std::unique_ptr<agents::Agent>> owned;
    for (const auto& name : cfg.agents) {
      if (name == "NM") owned.push_back(std::make_unique<agents::NeverMigrate>());
      else if (name == "AM") owned.push_back(std::make_unique<agents::AlwaysMigrate>());
      else if (name == "OPTIM") owned.push_back(std::make_unique<agents::Optim>());
      else if (name == "DRACM") owned.push_back(std::make_unique<dracm::DracmAgent>(dracm_trainer->net()));
      else if (name == "DQLM")
        owned.push_back(std::make_unique<dqlm::DqlmAgent>(dqlm_trainer->net(), 0.0, cfg.seed));
      else if (name == "MABTS") {
        auto bandit = std::make_unique<agents::Mabts>(world.grid.num_servers(), cfg.seed);
        const int warmup = cfg.mabts_warmup_episodes >= 0 ? cfg.mabts_warmup_episodes
                                                          : static_cast<int>(split.train.size());
        for (int e = 0; e < warmup; ++e)
          agents::run_episode(*bandit, world, sampler(-1 - static_cast<long>(e / 1024), e % 1024));
        owned.push_back(std::move(bandit));
      }
    }
    std::vector<agents::Agent*> roster;
    for (auto& a : owned) roster.push_back(a.get());
    SweepPointResult point{cfg.sweep, values[k], compare_agents(world, roster, test_eps)};
    if (log)
      for (const auto& r : point.rows)
        *log << "  " << r.agent << " mean " << fmt(r.mean_latency_s) << " s gap " << fmt(r.optimality_gap)
             << '\n';
    summary.points.push_back(std::move(point));
  }

  if (!train_only) {
    const fs::path cmp = out / "comparison.csv";
    write_comparison_csv(cmp, summary.points);
    summary.written.push_back(cmp);
  }
  return summary;
}

// ---- plot export ------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::size_t export_plot_data(const fs::path& comparison_csv, const fs::path& out_csv,
                             std::span<const std::string> metrics) {
  std::ifstream in(comparison_csv);
  if (!in) throw Error(Errc::MissingMetrics, "cannot read " + comparison_csv.string());
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw Error(Errc::MissingMetrics, "metrics file is empty");
  const std::vector<std::string> header = split_csv(line);
  auto col = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(Errc::MissingMetrics, "column '" + name + "' missing");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_axis = col("sweep_axis"), c_value = col("sweep_value"), c_agent = col("agent");
  std::vector<std::size_t> metric_cols;
  if (metrics.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (i != c_axis && i != c_value && i != c_agent) metric_cols.push_back(i);
  } else {
    for (const auto& m : metrics) metric_cols.push_back(col(m));
  }

  std::ostringstream os;
  os << "sweep_axis,sweep_value,agent,metric,value\n";
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != header.size())
      throw Error(Errc::MalformedLine, "comparison row has " + std::to_string(cells.size()) + " cells");
    for (std::size_t c : metric_cols) {
      os << cells[c_axis] << ',' << cells[c_value] << ',' << cells[c_agent] << ',' << header[c] << ','
         << cells[c] << '\n';
      ++rows;
    }
  }
  if (rows == 0) throw Error(Errc::MissingMetrics, "no metric rows in " + comparison_csv.string());
  write_text(out_csv, os.str());
  return rows;
}

}  // namespace edgemig::harness
