#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "edgemig/error.hpp"
#include "edgemig/traces.hpp"

using namespace edgemig;
using namespace edgemig::traces;

namespace {

std::vector<RawFix> every_minute(const std::string& id, const GridSpec& g, double hours, double t0 = 1.39e9) {
  std::vector<RawFix> f;
  const int n = static_cast<int>(hours * 60);
  for (int i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / n;
    f.push_back({id, t0 + 60.0 * i, g.lat_min + (0.1 + 0.8 * a) * (g.lat_max - g.lat_min),
                 g.lon_min + 0.5 * (g.lon_max - g.lon_min)});
  }
  return f;
}

}  // namespace

TEST(Parse, PlainLine) {
  const ParseResult r = parse_trace_text("abc 41.90 12.48 1392000000\n", FormatSpec::plain());
  ASSERT_EQ(r.fixes.size(), 1u);
  EXPECT_EQ(r.fixes[0], (RawFix{"abc", 1392000000.0, 41.90, 12.48}));
  EXPECT_TRUE(r.malformed.empty());
}

TEST(Parse, EmptyTextAndComments) {
  EXPECT_TRUE(parse_trace_text("", FormatSpec::plain()).fixes.empty());
  const ParseResult r = parse_trace_text("\n# header\n\n", FormatSpec::plain());
  EXPECT_TRUE(r.fixes.empty());
  EXPECT_TRUE(r.malformed.empty());
}

TEST(Parse, NonNumericLatIsCollected) {
  const ParseResult r =
      parse_trace_text("a 41.9 12.4 100\nb north 12.4 200\nc 41.8 12.5 300\n", FormatSpec::plain());
  ASSERT_EQ(r.fixes.size(), 2u);
  EXPECT_EQ(r.fixes[1].vehicle_id, "c");
  ASSERT_EQ(r.malformed.size(), 1u);
  EXPECT_EQ(r.malformed[0].lineno, 2u);
}

TEST(Parse, RomeFormat) {
  const ParseResult r = parse_trace_text(
      "156;2014-02-01 00:00:00.739166+01;POINT(41.8836718276551 12.4877775603346)\n", FormatSpec::rome());
  ASSERT_EQ(r.fixes.size(), 1u);
  EXPECT_EQ(r.fixes[0].vehicle_id, "156");
  EXPECT_NEAR(r.fixes[0].lat, 41.8836718276551, 1e-12);
  EXPECT_NEAR(r.fixes[0].lon, 12.4877775603346, 1e-12);
  // 2014-02-01T00:00:00.739166+01:00 == 2014-01-31T23:00:00.739166Z
  EXPECT_NEAR(r.fixes[0].timestamp, 1391209200.739166, 1e-5);
}

TEST(Parse, SanFranciscoFileTakesIdFromName) {
  const auto dir = std::filesystem::temp_directory_path() / "edgemig_test_sf";
  std::filesystem::create_directories(dir);
  const auto path = dir / "new_abboip.txt";
  std::ofstream(path) << "37.75134 -122.39488 0 1213084687\n37.75136 -122.39527 0 1213084659\n";
  const ParseResult r = parse_trace_file(path, FormatSpec::san_francisco());
  ASSERT_EQ(r.fixes.size(), 2u);
  EXPECT_EQ(r.fixes[0].vehicle_id, "new_abboip");
  EXPECT_EQ(r.fixes[0].timestamp, 1213084687.0);
}

TEST(Parse, MissingFileIsIoError) {
  try {
    parse_trace_file("/nonexistent/trace.txt", FormatSpec::plain());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoError);
  }
}

TEST(Resample, SixHoursEveryMinuteGivesATrace) {
  const GridSpec g = GridSpec::rome();
  ResampleReport rep;
  const auto out = resample_to_slots(every_minute("cab", g, 6.0), g, 100, 180.0, &rep);
  ASSERT_GE(out.size(), 1u);
  EXPECT_GE(out[0].slots.size(), 100u);
  EXPECT_EQ(rep.vehicles, 1u);
  for (const auto& p : out[0].slots) EXPECT_TRUE(g.contains(p.lat, p.lon));
}

TEST(Resample, AllOutsideGivesNothing) {
  const GridSpec g = GridSpec::rome();
  auto fixes = every_minute("cab", g, 6.0);
  for (auto& f : fixes) f.lat += 1.0;
  ResampleReport rep;
  EXPECT_TRUE(resample_to_slots(fixes, g, 100, 180.0, &rep).empty());
  EXPECT_EQ(rep.vehicles_skipped, 1u);
}

TEST(Resample, TwoSlotGapSplitsRun) {
  const GridSpec g = GridSpec::rome();
  SlotTrace t;
  t.id = "v";
  for (int k = 0; k < 30; ++k) t.slots.push_back({41.86 + 0.001 * k, 12.45});
  std::vector<RawFix> fixes = render_fixes(t);
  fixes.erase(fixes.begin() + 10, fixes.begin() + 12);  // slots 10 and 11 missing
  const auto out = resample_to_slots(fixes, g, 5, 180.0, nullptr);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].slots.size(), 10u);
  EXPECT_EQ(out[1].slots.size(), 18u);
  EXPECT_EQ(out[0].slots.back(), t.slots[9]);
  EXPECT_EQ(out[1].slots.front(), t.slots[12]);
}

TEST(Resample, OneSlotGapInterpolated) {
  const GridSpec g = GridSpec::rome();
  SlotTrace t;
  t.id = "v";
  for (int k = 0; k < 20; ++k) t.slots.push_back({41.86 + 0.001 * k, 12.45});
  std::vector<RawFix> fixes = render_fixes(t);
  fixes.erase(fixes.begin() + 7);
  ResampleReport rep;
  const auto out = resample_to_slots(fixes, g, 20, 180.0, &rep);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].slots[7].lat, t.slots[7].lat, 1e-12);
  EXPECT_EQ(rep.interpolated_slots, 1u);
}

TEST(Resample, IdempotentOnRenderedTraces) {
  const GridSpec g = GridSpec::san_francisco();
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SlotTrace t = synth_trace(s, g, 100, {});
    const auto back = resample_to_slots(render_fixes(t, 1e9), g, 100, 180.0, nullptr);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], t);
  }
}

TEST(Synth, DeterministicInBoxAndSpeedBounded) {
  const GridSpec g = GridSpec::rome();
  const SpeedRange sp{0.2, 1.5};
  const SlotTrace a = synth_trace(3, g, 200, sp), b = synth_trace(3, g, 200, sp);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, synth_trace(4, g, 200, sp));
  const double km_lat = g.rows * g.cell_km / (g.lat_max - g.lat_min);
  const double km_lon = g.cols * g.cell_km / (g.lon_max - g.lon_min);
  for (std::size_t k = 0; k < a.slots.size(); ++k) {
    EXPECT_TRUE(g.contains(a.slots[k].lat, a.slots[k].lon));
    locate_server(a.slots[k].lat, a.slots[k].lon, g);
    if (k == 0) continue;
    const double d = std::hypot((a.slots[k].lat - a.slots[k - 1].lat) * km_lat,
                                (a.slots[k].lon - a.slots[k - 1].lon) * km_lon);
    EXPECT_LE(d, sp.max_km + 1e-9);
  }
}

TEST(SlotCsv, RoundTripIsExact) {
  const GridSpec g = GridSpec::rome();
  std::vector<SlotTrace> ts;
  for (std::uint64_t s = 0; s < 5; ++s) ts.push_back(synth_trace(s, g, 50, {}));
  const auto path = std::filesystem::temp_directory_path() / "edgemig_slot_roundtrip.csv";
  write_slot_traces(path, ts);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "id,slot,lat,lon");
  EXPECT_EQ(read_slot_traces(path), ts);
}

TEST(Split, StableHashOrder) {
  const GridSpec g = GridSpec::rome();
  std::vector<SlotTrace> ts;
  for (std::uint64_t s = 0; s < 40; ++s) ts.push_back(synth_trace(s, g, 10, {}));
  std::vector<SlotTrace> rev(ts.rbegin(), ts.rend());
  const Split a = split_train_test(ts, 30, 10), b = split_train_test(rev, 30, 10);
  EXPECT_EQ(a.train.size(), 30u);
  EXPECT_EQ(a.test.size(), 10u);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  for (const auto& t : a.test)
    for (const auto& u : a.train) EXPECT_NE(t.id, u.id);
}
