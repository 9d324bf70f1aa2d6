#include "edgemig/traces.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string_view>

#include "edgemig/error.hpp"
#include "edgemig/rng.hpp"

namespace edgemig::traces {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, const std::string& delims) {
  std::vector<std::string_view> out;
  if (delims.empty()) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || delims.find(line[i]) != std::string::npos) {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
long long days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

std::optional<double> parse_iso_time(std::string_view s) {
  s = trim(s);
  // YYYY-MM-DD HH:MM:SS
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != ' ' && s[10] != 'T') ||
      s[13] != ':' || s[16] != ':')
    return std::nullopt;
  const auto y = parse_int(s.substr(0, 4));
  const auto mo = parse_int(s.substr(5, 2));
  const auto d = parse_int(s.substr(8, 2));
  const auto h = parse_int(s.substr(11, 2));
  const auto mi = parse_int(s.substr(14, 2));
  const auto se = parse_int(s.substr(17, 2));
  if (!y || !mo || !d || !h || !mi || !se || *mo < 1 || *mo > 12 || *d < 1 || *d > 31 || *h > 23 ||
      *mi > 59 || *se > 60)
    return std::nullopt;
  double t = static_cast<double>(days_from_civil(*y, static_cast<unsigned>(*mo),
                                                 static_cast<unsigned>(*d))) * 86400.0 +
             *h * 3600.0 + *mi * 60.0 + *se;
  std::string_view rest = s.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    std::size_t n = 1;
    while (n < rest.size() && std::isdigit(static_cast<unsigned char>(rest[n]))) ++n;
    const auto frac = parse_double(std::string("0") + std::string(rest.substr(0, n)));
    if (!frac) return std::nullopt;
    t += *frac;
    rest.remove_prefix(n);
  }
  if (rest == "Z") rest = {};
  if (!rest.empty()) {
    if (rest.front() != '+' && rest.front() != '-') return std::nullopt;
    const double sign = rest.front() == '+' ? 1.0 : -1.0;
    rest.remove_prefix(1);
    std::string digits;
    for (char ch : rest)
      if (ch != ':') digits.push_back(ch);
    if (digits.size() != 2 && digits.size() != 4) return std::nullopt;
    const auto oh = parse_int(std::string_view(digits).substr(0, 2));
    const auto om = digits.size() == 4 ? parse_int(std::string_view(digits).substr(2, 2))
                                       : std::optional<int>(0);
    if (!oh || !om) return std::nullopt;
    t -= sign * (*oh * 3600.0 + *om * 60.0);
  }
  return t;
}

bool parse_wkt_point(std::string_view s, double& lat, double& lon) {
  s = trim(s);
  constexpr std::string_view kPrefix = "POINT(";
  if (s.size() < kPrefix.size() + 1 || s.substr(0, kPrefix.size()) != kPrefix || s.back() != ')')
    return false;
  const auto inner = split(s.substr(kPrefix.size(), s.size() - kPrefix.size() - 1), "");
  if (inner.size() != 2) return false;
  const auto a = parse_double(inner[0]);
  const auto b = parse_double(inner[1]);
  if (!a || !b) return false;
  lat = *a;
  lon = *b;
  return true;
}

std::optional<RawFix> parse_line(std::string_view line, const FormatSpec& spec,
                                 std::string& why) {
  const auto fields = split(line, spec.delimiters);
  if (fields.size() < spec.columns.size()) {
    why = "expected " + std::to_string(spec.columns.size()) + " fields, got " +
          std::to_string(fields.size());
    return std::nullopt;
  }
  RawFix fix;
  fix.vehicle_id = spec.default_id;
  bool have_lat = false, have_lon = false, have_ts = false;
  for (std::size_t i = 0; i < spec.columns.size(); ++i) {
    const std::string_view f = fields[i];
    switch (spec.columns[i]) {
      case Field::Id:
        fix.vehicle_id = std::string(trim(f));
        break;
      case Field::Lat: {
        const auto v = parse_double(f);
        if (!v) return why = "non-numeric lat", std::nullopt;
        fix.lat = *v;
        have_lat = true;
        break;
      }
      case Field::Lon: {
        const auto v = parse_double(f);
        if (!v) return why = "non-numeric lon", std::nullopt;
        fix.lon = *v;
        have_lon = true;
        break;
      }
      case Field::EpochSeconds: {
        const auto v = parse_double(f);
        if (!v) return why = "non-numeric timestamp", std::nullopt;
        fix.timestamp = *v;
        have_ts = true;
        break;
      }
      case Field::IsoTime: {
        const auto v = parse_iso_time(f);
        if (!v) return why = "bad timestamp", std::nullopt;
        fix.timestamp = *v;
        have_ts = true;
        break;
      }
      case Field::WktPoint:
        if (!parse_wkt_point(f, fix.lat, fix.lon)) return why = "bad POINT", std::nullopt;
        have_lat = have_lon = true;
        break;
      case Field::Skip:
        break;
    }
  }
  if (!have_lat || !have_lon || !have_ts) return why = "format lacks lat/lon/ts", std::nullopt;
  if (fix.vehicle_id.empty()) return why = "missing vehicle id", std::nullopt;
  if (!std::isfinite(fix.lat) || !std::isfinite(fix.lon) || !std::isfinite(fix.timestamp))
    return why = "non-finite value", std::nullopt;
  return fix;
}

struct PlanePoint {
  double x_km;
  double y_km;
};

}  // namespace

FormatSpec FormatSpec::plain() {
  return {{Field::Id, Field::Lat, Field::Lon, Field::EpochSeconds}, "", ""};
}

FormatSpec FormatSpec::rome() { return {{Field::Id, Field::IsoTime, Field::WktPoint}, ";", ""}; }

FormatSpec FormatSpec::san_francisco() {
  return {{Field::Lat, Field::Lon, Field::Skip, Field::EpochSeconds}, "", ""};
}

FormatSpec FormatSpec::named(const std::string& name) {
  if (name == "plain") return plain();
  if (name == "rome") return rome();
  if (name == "sf" || name == "san_francisco") return san_francisco();
  throw Error(Errc::ConfigInvalid, "unknown trace format '" + name + "'");
}

ParseResult parse_trace_text(const std::string& text, const FormatSpec& spec) {
  ParseResult out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::string why;
    if (auto fix = parse_line(t, spec, why))
      out.fixes.push_back(std::move(*fix));
    else
      out.malformed.push_back({lineno, why});
  }
  return out;
}

ParseResult parse_trace_file(const std::filesystem::path& path, const FormatSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::IoError, "read failed: " + path.string());
  FormatSpec s = spec;
  if (s.default_id.empty()) s.default_id = path.stem().string();
  return parse_trace_text(ss.str(), s);
}

std::vector<SlotTrace> resample_to_slots(std::vector<RawFix> fixes, const GridSpec& grid,
                                         int horizon, double slot_seconds,
                                         ResampleReport* report) {
  ResampleReport rep;
  std::vector<SlotTrace> out;
  std::stable_sort(fixes.begin(), fixes.end(), [](const RawFix& a, const RawFix& b) {
    if (a.vehicle_id != b.vehicle_id) return a.vehicle_id < b.vehicle_id;
    return a.timestamp < b.timestamp;
  });
  const double half = slot_seconds / 2.0;

  for (std::size_t begin = 0; begin < fixes.size();) {
    std::size_t end = begin;
    while (end < fixes.size() && fixes[end].vehicle_id == fixes[begin].vehicle_id) ++end;
    ++rep.vehicles;
    const std::span<const RawFix> vf(fixes.data() + begin, end - begin);
    const double t0 = vf.front().timestamp;
    const auto n_slots =
        static_cast<std::size_t>(std::floor((vf.back().timestamp - t0 + half) / slot_seconds)) + 1;

    std::vector<std::optional<SlotPoint>> pos(n_slots);
    for (std::size_t k = 0; k < n_slots; ++k) {
      const double b = t0 + static_cast<double>(k) * slot_seconds;
      auto it = std::lower_bound(vf.begin(), vf.end(), b - half,
                                 [](const RawFix& f, double t) { return f.timestamp < t; });
      const RawFix* best = nullptr;
      for (; it != vf.end() && it->timestamp <= b + half; ++it)
        if (!best || std::abs(it->timestamp - b) < std::abs(best->timestamp - b)) best = &*it;
      if (best && grid.contains(best->lat, best->lon)) pos[k] = SlotPoint{best->lat, best->lon};
    }
    std::vector<bool> filled(n_slots, false);
    for (std::size_t k = 1; k + 1 < n_slots; ++k) {
      if (!pos[k] && pos[k - 1] && pos[k + 1] && !filled[k - 1]) {
        pos[k] = SlotPoint{0.5 * (pos[k - 1]->lat + pos[k + 1]->lat),
                           0.5 * (pos[k - 1]->lon + pos[k + 1]->lon)};
        filled[k] = true;
      }
    }

    std::vector<SlotTrace> runs;
    std::vector<std::size_t> run_fills;
    for (std::size_t k = 0; k < n_slots;) {
      if (!pos[k]) {
        ++k;
        continue;
      }
      std::size_t j = k;
      std::size_t fills = 0;
      SlotTrace tr;
      tr.slot_seconds = slot_seconds;
      for (; j < n_slots && pos[j]; ++j) {
        tr.slots.push_back(*pos[j]);
        fills += filled[j] ? 1 : 0;
      }
      if (static_cast<int>(tr.slots.size()) >= horizon) {
        runs.push_back(std::move(tr));
        run_fills.push_back(fills);
      }
      k = j;
    }
    if (runs.empty()) ++rep.vehicles_skipped;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      runs[r].id = runs.size() == 1 ? vf.front().vehicle_id
                                    : vf.front().vehicle_id + "#" + std::to_string(r);
      rep.interpolated_slots += run_fills[r];
      out.push_back(std::move(runs[r]));
    }
    begin = end;
  }
  rep.traces = out.size();
  if (report) *report = rep;
  return out;
}

std::vector<RawFix> render_fixes(const SlotTrace& trace, double t0) {
  std::vector<RawFix> fixes;
  fixes.reserve(trace.slots.size());
  for (std::size_t k = 0; k < trace.slots.size(); ++k)
    fixes.push_back({trace.id, t0 + static_cast<double>(k) * trace.slot_seconds,
                     trace.slots[k].lat, trace.slots[k].lon});
  return fixes;
}

SlotTrace synth_trace(std::uint64_t seed, const GridSpec& grid, int horizon, SpeedRange speed) {
  if (!(speed.min_km > 0.0) || !(speed.max_km >= speed.min_km))
    throw Error(Errc::ConfigInvalid, "speed range must be positive");
  const double height = grid.rows * grid.cell_km;
  const double width = grid.cols * grid.cell_km;
  Rng rng = make_stream(seed, StreamPurpose::SyntheticTrace);

  auto random_point = [&] { return PlanePoint{uniform(rng, 0.0, width), uniform(rng, 0.0, height)}; };
  auto to_latlon = [&](PlanePoint p) {
    const double lat = grid.lat_min + p.y_km / height * (grid.lat_max - grid.lat_min);
    const double lon = grid.lon_min + p.x_km / width * (grid.lon_max - grid.lon_min);
    return SlotPoint{std::clamp(lat, grid.lat_min, grid.lat_max),
                     std::clamp(lon, grid.lon_min, grid.lon_max)};
  };

  SlotTrace tr;
  tr.id = "synth-" + std::to_string(seed);
  PlanePoint at = random_point();
  PlanePoint goal = random_point();
  double leg_speed = uniform(rng, speed.min_km, speed.max_km);
  for (int t = 0; t < horizon; ++t) {
    tr.slots.push_back(to_latlon(at));
    const double dx = goal.x_km - at.x_km;
    const double dy = goal.y_km - at.y_km;
    const double dist = std::hypot(dx, dy);
    if (dist <= leg_speed) {
      at = goal;
      goal = random_point();
      leg_speed = uniform(rng, speed.min_km, speed.max_km);
    } else {
      at.x_km += dx / dist * leg_speed;
      at.y_km += dy / dist * leg_speed;
    }
  }
  return tr;
}

void write_slot_traces(const std::filesystem::path& path, const std::vector<SlotTrace>& traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << "id,slot,lat,lon\n";
  char buf[64];
  auto num = [&buf](double v) {
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
  };
  for (const auto& tr : traces) {
    if (tr.id.find_first_of(",\n") != std::string::npos)
      throw Error(Errc::IoError, "trace id contains a separator: " + tr.id);
    for (std::size_t k = 0; k < tr.slots.size(); ++k)
      out << tr.id << ',' << k << ',' << num(tr.slots[k].lat) << ',' << num(tr.slots[k].lon) << '\n';
  }
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

std::vector<SlotTrace> read_slot_traces(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "id,slot,lat,lon")
    throw Error(Errc::MalformedLine, path.string() + ":1: expected header id,slot,lat,lon");
  std::vector<SlotTrace> traces;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ",");
    const auto slot = f.size() == 4 ? parse_int(f[1]) : std::nullopt;
    const auto lat = f.size() == 4 ? parse_double(f[2]) : std::nullopt;
    const auto lon = f.size() == 4 ? parse_double(f[3]) : std::nullopt;
    if (!slot || !lat || !lon)
      throw Error(Errc::MalformedLine, path.string() + ":" + std::to_string(lineno));
    if (traces.empty() || traces.back().id != f[0]) {
      traces.emplace_back();
      traces.back().id = std::string(f[0]);
    }
    auto& tr = traces.back();
    if (*slot != static_cast<int>(tr.slots.size()))
      throw Error(Errc::MalformedLine,
                  path.string() + ":" + std::to_string(lineno) + ": slots out of order");
    tr.slots.push_back({*lat, *lon});
  }
  return traces;
}

std::uint64_t id_hash(const std::string& id) noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : id) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

Split split_train_test(std::vector<SlotTrace> traces, std::size_t n_train, std::size_t n_test) {
  std::sort(traces.begin(), traces.end(), [](const SlotTrace& a, const SlotTrace& b) {
    const auto ha = id_hash(a.id), hb = id_hash(b.id);
    return ha != hb ? ha < hb : a.id < b.id;
  });
  Split s;
  std::size_t i = 0;
  for (; i < traces.size() && s.train.size() < n_train; ++i) s.train.push_back(std::move(traces[i]));
  for (; i < traces.size() && s.test.size() < n_test; ++i) s.test.push_back(std::move(traces[i]));
  return s;
}

}  // namespace edgemig::traces
