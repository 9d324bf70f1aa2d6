// Command-line front end: ingest, train, eval, sweep, check, export.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgemig/checks.hpp"
#include "edgemig/error.hpp"
#include "edgemig/harness.hpp"
#include "edgemig/traces.hpp"

namespace fs = std::filesystem;
using namespace edgemig;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kDataError = 2;
constexpr int kCheckFailed = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "edgemig_out";
  std::string agents;
  std::string grid;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "run seed (overrides the config)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--agents", f.agents, "comma-separated agents: NM,AM,MABTS,DQLM,DRACM,OPTIM");
  cmd->add_option("--grid", f.grid, "rome, sf or synthetic");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  return out;
}

harness::ExperimentConfig resolve(const CommonFlags& f) {
  harness::ExperimentConfig cfg =
      f.config.empty() ? harness::ExperimentConfig{} : harness::ExperimentConfig::from_file(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.agents.empty()) cfg.agents = split_list(f.agents);
  if (!f.grid.empty()) cfg.grid = harness::parse_grid(f.grid);
  cfg.validate();
  return cfg;
}

int exit_code(Errc code) {
  switch (code) {
    case Errc::ConfigInvalid: return kConfigError;
    default: return kDataError;
  }
}

int cmd_ingest(const std::vector<std::string>& inputs, const std::string& format, const std::string& grid_name,
               int horizon, double slot_seconds, const std::string& out) {
  harness::ExperimentConfig gc;
  gc.grid = harness::parse_grid(grid_name.empty() ? "rome" : grid_name);
  const GridSpec grid = gc.grid_spec();
  const traces::FormatSpec spec = traces::FormatSpec::named(format);

  std::vector<RawFix> fixes;
  nlohmann::json report;
  std::size_t malformed = 0;
  for (const auto& in : inputs) {
    if (!fs::exists(in)) throw Error(Errc::TraceSourceMissing, in + " not found");
    traces::ParseResult pr = traces::parse_trace_file(in, spec);
    malformed += pr.malformed.size();
    for (const auto& m : pr.malformed)
      report["malformed"].push_back({{"file", in}, {"line", m.lineno}, {"reason", m.reason}});
    fixes.insert(fixes.end(), pr.fixes.begin(), pr.fixes.end());
  }
  traces::ResampleReport rr;
  const std::vector<SlotTrace> slot = traces::resample_to_slots(std::move(fixes), grid, horizon, slot_seconds, &rr);
  fs::create_directories(out);
  traces::write_slot_traces(fs::path(out) / "slot_traces.csv", slot);
  report["files"] = inputs;
  report["format"] = format;
  report["horizon_slots"] = horizon;
  report["slot_seconds"] = slot_seconds;
  report["malformed_lines"] = malformed;
  report["vehicles"] = rr.vehicles;
  report["vehicles_skipped"] = rr.vehicles_skipped;
  report["traces"] = rr.traces;
  report["interpolated_slots"] = rr.interpolated_slots;
  std::ofstream(fs::path(out) / "ingest_report.json") << report.dump(2) << '\n';
  std::cout << rr.traces << " traces from " << rr.vehicles << " vehicles (" << malformed
            << " malformed lines) -> " << (fs::path(out) / "slot_traces.csv").string() << '\n';
  return kOk;
}

int cmd_check(std::uint64_t seed) {
  bool all = true;
  for (const auto& r : checks::run_all(seed)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
    all = all && r.passed;
  }
  return all ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgemig: service-migration experiments on an edge-server grid"};
  app.require_subcommand(1);

  std::vector<std::string> ingest_inputs;
  std::string ingest_format = "plain", ingest_grid, ingest_out = "edgemig_out";
  int ingest_horizon = 100;
  double ingest_slot_s = 180.0;
  auto* ingest = app.add_subcommand("ingest", "raw GPS fixes -> slot traces CSV + report");
  ingest->add_option("--input", ingest_inputs, "raw trace files")->required();
  ingest->add_option("--format", ingest_format, "plain, rome or sf");
  ingest->add_option("--grid", ingest_grid, "rome, sf or synthetic (default rome)");
  ingest->add_option("--horizon", ingest_horizon, "slots per trace");
  ingest->add_option("--slot-seconds", ingest_slot_s, "slot length in seconds");
  ingest->add_option("--out", ingest_out, "output directory");

  CommonFlags train_f, eval_f, sweep_f;
  std::string eval_ckpt;
  std::string sweep_axis;
  auto* train = app.add_subcommand("train", "train DRACM and/or DQLM, write metrics and checkpoints");
  add_common(train, train_f);
  auto* eval = app.add_subcommand("eval", "compare agents on held-out episodes");
  add_common(eval, eval_f);
  eval->add_option("--checkpoints", eval_ckpt, "directory with dracm/dqlm checkpoints to load");
  auto* sweep = app.add_subcommand("sweep", "comparison across one environment axis");
  add_common(sweep, sweep_f);
  sweep->add_option("--axis", sweep_axis, "user_rate, kappa or mc (default: from config)");

  std::uint64_t check_seed = 0;
  auto* check = app.add_subcommand("check", "oracle, gradient and property checks");
  check->add_option("--seed", check_seed, "seed");

  std::string export_in, export_out = "plot_data.csv";
  std::vector<std::string> export_metrics;
  auto* exp = app.add_subcommand("export", "comparison CSV -> tidy long-format CSV");
  exp->add_option("--input", export_in, "comparison.csv")->required();
  exp->add_option("--out", export_out, "output CSV");
  exp->add_option("--metric", export_metrics, "metric columns to keep (default all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*ingest)
      return cmd_ingest(ingest_inputs, ingest_format, ingest_grid, ingest_horizon, ingest_slot_s, ingest_out);
    if (*check) return cmd_check(check_seed);
    if (*exp) {
      const std::size_t n = harness::export_plot_data(export_in, export_out, export_metrics);
      std::cout << n << " rows -> " << export_out << '\n';
      return kOk;
    }
    if (*train) {
      harness::ExperimentConfig cfg = resolve(train_f);
      if (train_f.agents.empty()) cfg.agents = {"DRACM"};
      cfg.sweep = harness::SweepAxis::None;
      harness::run(cfg, train_f.out, &std::cout, true);
      return kOk;
    }
    if (*eval) {
      harness::ExperimentConfig cfg = resolve(eval_f);
      if (!eval_ckpt.empty()) cfg.checkpoint_dir = eval_ckpt;
      cfg.sweep = harness::SweepAxis::None;
      harness::run(cfg, eval_f.out, &std::cout);
      return kOk;
    }
    if (*sweep) {
      harness::ExperimentConfig cfg = resolve(sweep_f);
      if (!sweep_axis.empty()) {
        if (sweep_axis == "user_rate") cfg.sweep = harness::SweepAxis::UserRate;
        else if (sweep_axis == "kappa") cfg.sweep = harness::SweepAxis::KappaMidpoint;
        else if (sweep_axis == "mc") cfg.sweep = harness::SweepAxis::MigrationCoeff;
        else throw Error(Errc::ConfigInvalid, "unknown sweep axis '" + sweep_axis + "'");
        cfg.sweep_values = harness::default_sweep_values(cfg.sweep);
      }
      if (cfg.sweep == harness::SweepAxis::None)
        throw Error(Errc::ConfigInvalid, "sweep needs --axis or a sweep key in the config");
      harness::run(cfg, sweep_f.out, &std::cout);
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "edgemig: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "edgemig: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}
