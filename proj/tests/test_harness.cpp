#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgemig/agents.hpp"
#include "edgemig/error.hpp"
#include "edgemig/harness.hpp"

using namespace edgemig;
using namespace edgemig::harness;
namespace fs = std::filesystem;

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

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("edgemig_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.seed = 7;
  c.grid_rows = 3;
  c.grid_cols = 3;
  c.env.horizon = 10;
  c.synthetic_traces = 10;
  c.agents = {"NM", "AM", "OPTIM"};
  return c;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// Reverses the shared trace after its own episode so the next agent sees
// different exogenous inputs.
class Saboteur : public agents::Agent {
 public:
  explicit Saboteur(SlotTrace* t) : trace_(t) {}
  std::string name() const override { return "SAB"; }
  void init(const agents::EpisodeContext& ctx) override { home_ = ctx.initial_server; }
  agents::AgentDecision act(const Observation&, int) override { return {home_, {}, std::nullopt}; }
  void end_episode() override { std::reverse(trace_->slots.begin(), trace_->slots.end()); }

 private:
  SlotTrace* trace_;
  ServerId home_;
};

}  // namespace

TEST(Config, ParsesAndRoundTrips) {
  const auto c = ExperimentConfig::from_json_text(
      R"({"seed": 3, "grid": "synthetic", "grid_rows": 2, "grid_cols": 5, "mc_min_s_per_hop": 2,
          "mc_max_s_per_hop": 4, "agents": ["NM", "OPTIM"], "sweep_mc_s_per_hop": [1, 2]})");
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.grid_spec().num_servers(), 10);
  EXPECT_EQ(c.env.mc_s_per_hop.lo, 2.0);
  EXPECT_EQ(c.sweep, SweepAxis::MigrationCoeff);
  EXPECT_EQ(c.sweep_values, (std::vector<double>{1, 2}));
  EXPECT_TRUE(c.has_agent("NM"));
  EXPECT_FALSE(c.has_agent("AM"));
  const auto d = ExperimentConfig::from_json_text(c.to_json_text());
  EXPECT_EQ(d.to_json_text(), c.to_json_text());
}

TEST(Config, RejectsBadInput) {
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json_text(R"({"sed": 1})"); }), Errc::ConfigInvalid);
  EXPECT_EQ(code_of([] {
              ExperimentConfig::from_json_text(
                  R"({"sweep_mc_s_per_hop": true, "sweep_user_rate_tasks_per_slot": true})");
            }),
            Errc::ConfigInvalid);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json_text(R"({"seed": "x"})"); }), Errc::ConfigInvalid);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json_text(R"({"agents": ["NM", "XYZ"]})"); }),
            Errc::ConfigInvalid);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json_text("{not json"); }), Errc::ConfigInvalid);
}

TEST(Sweep, AppliesAxis) {
  EnvConfig e;
  EXPECT_EQ(apply_sweep(e, SweepAxis::UserRate, 3.0).user_rate, 3.0);
  const EnvConfig k = apply_sweep(e, SweepAxis::KappaMidpoint, 6000.0);
  EXPECT_DOUBLE_EQ(k.kappa_cycles_per_bit.mid(), 6000.0);
  EXPECT_DOUBLE_EQ(k.kappa_cycles_per_bit.hi - k.kappa_cycles_per_bit.lo,
                   e.kappa_cycles_per_bit.hi - e.kappa_cycles_per_bit.lo);
  const EnvConfig m = apply_sweep(e, SweepAxis::MigrationCoeff, 5.0);
  EXPECT_EQ(m.mc_s_per_hop.lo, 5.0);
  EXPECT_EQ(m.mc_s_per_hop.hi, 5.0);
}

TEST(Run, BaselinesAgainstOptimum) {
  const fs::path out = scratch("run");
  const RunSummary s = run(small_config(), out);
  ASSERT_EQ(s.points.size(), 1u);
  const auto& rows = s.points[0].rows;
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows.front().agent, "OPTIM");
  EXPECT_EQ(rows.front().optimality_gap, 0.0);
  for (const auto& r : rows) EXPECT_GE(r.optimality_gap, 0.0);
  EXPECT_TRUE(fs::exists(out / "comparison.csv"));
  EXPECT_TRUE(fs::exists(out / "config_echo.json"));
  EXPECT_EQ(count_lines(slurp(out / "comparison.csv")), 4u);
}

TEST(Run, RerunIsByteIdentical) {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  run(small_config(), a);
  run(small_config(), b);
  EXPECT_EQ(slurp(a / "comparison.csv"), slurp(b / "comparison.csv"));
}

TEST(Run, DroppingAnAgentDropsItsRow) {
  ExperimentConfig c = small_config();
  c.agents = {"NM", "OPTIM"};
  const RunSummary s = run(c, scratch("drop"));
  ASSERT_EQ(s.points[0].rows.size(), 2u);
  for (const auto& r : s.points[0].rows) EXPECT_NE(r.agent, "AM");
}

TEST(Run, MissingTraceFile) {
  ExperimentConfig c = small_config();
  c.trace_csv = "/nonexistent/slot_traces.csv";
  EXPECT_EQ(code_of([&] { run(c, scratch("missing")); }), Errc::TraceSourceMissing);
}

TEST(Compare, StaticUserTiesBaselines) {
  World w{GridSpec::synthetic(3, 3), EnvConfig{}};
  w.env.horizon = 12;
  SlotTrace tr;
  tr.id = "still";
  tr.slots.assign(12, {w.grid.lat_min + 0.5 * (w.grid.lat_max - w.grid.lat_min),
                       w.grid.lon_min + 0.5 * (w.grid.lon_max - w.grid.lon_min)});
  // Cheap computation everywhere, so staying with the user is optimal.
  w.env.server_rate = {0.0, 0.0};
  w.env.kappa_cycles_per_bit = {1.0, 1.0};
  agents::NeverMigrate nm;
  agents::AlwaysMigrate am;
  agents::Optim opt;
  agents::Agent* roster[] = {&nm, &am, &opt};
  const std::vector<EpisodeSpec> eps{{&tr, 1}, {&tr, 2}};
  const auto rows = compare_agents(w, roster, eps);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].mean_latency_s, rows[1].mean_latency_s);
  EXPECT_EQ(rows[1].mean_latency_s, rows[2].mean_latency_s);
  EXPECT_EQ(code_of([&] { compare_agents(w, roster, {}); }), Errc::EmptyTestSet);
}

TEST(Compare, DetectsUnequalEpisodes) {
  World w{GridSpec::synthetic(3, 3), EnvConfig{}};
  w.env.horizon = 12;
  SlotTrace tr = traces::synth_trace(3, w.grid, 12, {});
  Saboteur sab(&tr);
  agents::NeverMigrate nm;
  agents::Agent* roster[] = {&sab, &nm};
  const std::vector<EpisodeSpec> eps{{&tr, 1}};
  EXPECT_EQ(code_of([&] { compare_agents(w, roster, eps); }), Errc::FairnessViolation);
}

TEST(Export, TidyRowsPerAgentSweepAndMetric) {
  ExperimentConfig c = small_config();
  c.env.horizon = 6;
  c.sweep = SweepAxis::MigrationCoeff;
  c.sweep_values = {1, 2, 3, 4, 5};
  const fs::path out = scratch("export");
  run(c, out);
  const std::vector<std::string> metric{"mean_latency_s"};
  EXPECT_EQ(export_plot_data(out / "comparison.csv", out / "plot.csv", metric), 15u);
  const std::string first = slurp(out / "plot.csv");
  EXPECT_EQ(first.substr(0, first.find('\n')), "sweep_axis,sweep_value,agent,metric,value");
  EXPECT_EQ(count_lines(first), 16u);
  export_plot_data(out / "comparison.csv", out / "plot.csv", metric);
  EXPECT_EQ(slurp(out / "plot.csv"), first);

  EXPECT_EQ(code_of([&] { export_plot_data(out / "nope.csv", out / "p2.csv"); }), Errc::MissingMetrics);
  const std::vector<std::string> bogus{"throughput"};
  EXPECT_EQ(code_of([&] { export_plot_data(out / "comparison.csv", out / "p3.csv", bogus); }),
            Errc::MissingMetrics);
  std::ofstream(out / "empty.csv").close();
  EXPECT_EQ(code_of([&] { export_plot_data(out / "empty.csv", out / "p4.csv"); }), Errc::MissingMetrics);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(fmt(0.1), "0.1");
  EXPECT_EQ(fmt(2.0), "2");
  EXPECT_EQ(std::stod(fmt(1.0 / 3.0)), 1.0 / 3.0);
}
