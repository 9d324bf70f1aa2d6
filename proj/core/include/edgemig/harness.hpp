#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "edgemig/agent.hpp"
#include "edgemig/dracm.hpp"
#include "edgemig/episode.hpp"

namespace edgemig::harness {

enum class GridChoice { Rome, SanFrancisco, Synthetic };
enum class SweepAxis { None, UserRate, KappaMidpoint, MigrationCoeff };

std::string to_string(SweepAxis axis);
GridChoice parse_grid(const std::string& name);

/// Default sweep values per axis (tasks/slot, cycles/bit, s/hop).
std::vector<double> default_sweep_values(SweepAxis axis);
/// Environment with one sweep value applied. The kappa sweep moves the
/// range midpoint and keeps its width.
EnvConfig apply_sweep(EnvConfig env, SweepAxis axis, double value);

inline const std::vector<std::string> kAllAgents{"NM", "AM", "MABTS", "DQLM", "DRACM", "OPTIM"};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  GridChoice grid = GridChoice::Synthetic;
  int grid_rows = 8;
  int grid_cols = 8;
  EnvConfig env;
  dracm::TrainerConfig trainer;
  int embed_dim = 2;
  int lstm_hidden = 256;
  int head_hidden = 128;
  std::vector<std::string> agents = kAllAgents;

  std::filesystem::path trace_csv;  // empty: synthetic traces
  int synthetic_traces = 40;
  int n_train = 0;  // 0: 80% of the usable traces
  int n_test = 0;   // 0: the rest
  int eval_seeds_per_trace = 1;
  int mabts_warmup_episodes = -1;  // -1: one pass over the training traces
  std::filesystem::path checkpoint_dir;  // load trained nets instead of training

  SweepAxis sweep = SweepAxis::None;
  std::vector<double> sweep_values;

  /// Flat JSON with unit-suffixed keys. Unknown keys, malformed values and
  /// more than one sweep key raise ConfigInvalid.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);
  std::string to_json_text() const;
  void validate() const;

  GridSpec grid_spec() const;
  dracm::NetShape net_shape() const;
  bool has_agent(const std::string& name) const;
};

struct ComparisonRow {
  std::string agent;
  double mean_latency_s = 0.0;
  double std_latency_s = 0.0;
  CostBreakdown mean_breakdown;
  double optimality_gap = 0.0;
  std::vector<double> episode_latency;
};

/// Plays every agent on the same episodes. Each episode's snapshot digest
/// must agree across agents. Rows are sorted by mean latency, then name.
std::vector<ComparisonRow> compare_agents(const World& world, std::span<agents::Agent* const> roster,
                                          std::span<const EpisodeSpec> episodes);

struct SweepPointResult {
  SweepAxis axis = SweepAxis::None;
  double value = 0.0;
  std::vector<ComparisonRow> rows;
};

struct RunSummary {
  std::vector<SweepPointResult> points;
  std::vector<std::filesystem::path> written;
};

/// Traces -> training -> comparison for every sweep point, writing
/// metrics_<agent>[_<k>].csv, comparison.csv, config_echo.json and
/// checkpoints under `out`. With `train_only`, the comparison is skipped.
RunSummary run(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream* log = nullptr,
               bool train_only = false);

/// Usable traces for the config: from trace_csv or synthesized, filtered
/// to those that cover the horizon.
std::vector<SlotTrace> load_traces(const ExperimentConfig& cfg);

/// Comparison CSV -> tidy rows (sweep_axis, sweep_value, agent, metric,
/// value). An empty `metrics` keeps every metric column.
std::size_t export_plot_data(const std::filesystem::path& comparison_csv,
                             const std::filesystem::path& out_csv,
                             std::span<const std::string> metrics = {});

void write_comparison_csv(const std::filesystem::path& path, std::span<const SweepPointResult> points);

/// Shortest round-trip decimal form, used for every CSV number.
std::string fmt(double v);

}  // namespace edgemig::harness
