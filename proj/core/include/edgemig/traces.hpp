#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edgemig/topology.hpp"

namespace edgemig {

struct RawFix {
  std::string vehicle_id;
  double timestamp = 0.0;  // seconds since epoch
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const RawFix&, const RawFix&) = default;
};

struct SlotPoint {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const SlotPoint&, const SlotPoint&) = default;
};

/// A user's position at the start of each fixed-length slot.
struct SlotTrace {
  std::string id;
  std::vector<SlotPoint> slots;
  double slot_seconds = 180.0;
  friend bool operator==(const SlotTrace&, const SlotTrace&) = default;
};

}  // namespace edgemig

namespace edgemig::traces {

enum class Field {
  Id,
  Lat,
  Lon,
  EpochSeconds,
  IsoTime,   // "YYYY-MM-DD HH:MM:SS[.frac][+HH[:MM]]"
  WktPoint,  // "POINT(lat lon)"
  Skip,
};

/// Column layout of a raw trace file. An empty delimiter set means "split on
/// runs of whitespace"; otherwise each delimiter character ends a field.
struct FormatSpec {
  std::vector<Field> columns;
  std::string delimiters;
  /// Used when no column carries the vehicle id (one file per vehicle).
  std::string default_id;

  static FormatSpec plain();          // id lat lon ts
  static FormatSpec rome();           // id;iso-time;POINT(lat lon)
  static FormatSpec san_francisco();  // lat lon occupied ts, id from filename
  static FormatSpec named(const std::string& name);
};

struct MalformedLine {
  std::size_t lineno = 0;
  std::string reason;
};

struct ParseResult {
  std::vector<RawFix> fixes;
  std::vector<MalformedLine> malformed;
};

/// Parses one fix per well-formed line, in file order. Blank lines are
/// skipped silently; bad lines are collected rather than thrown.
ParseResult parse_trace_file(const std::filesystem::path& path, const FormatSpec& spec);
ParseResult parse_trace_text(const std::string& text, const FormatSpec& spec);

struct ResampleReport {
  std::size_t vehicles = 0;
  std::size_t vehicles_skipped = 0;
  std::size_t traces = 0;
  std::size_t interpolated_slots = 0;
};

std::vector<SlotTrace> resample_to_slots(std::vector<RawFix> fixes, const GridSpec& grid,
                                         int horizon, double slot_seconds = 180.0,
                                         ResampleReport* report = nullptr);

/// Inverse of resampling: one fix per slot at t0 + k * slot_seconds.
std::vector<RawFix> render_fixes(const SlotTrace& trace, double t0 = 0.0);

struct SpeedRange {
  double min_km = 0.2;
  double max_km = 1.5;
};

/// Random-waypoint walk over the grid box, deterministic per seed.
SlotTrace synth_trace(std::uint64_t seed, const GridSpec& grid, int horizon, SpeedRange speed);

/// Canonical CSV with header `id,slot,lat,lon`.
void write_slot_traces(const std::filesystem::path& path, const std::vector<SlotTrace>& traces);
std::vector<SlotTrace> read_slot_traces(const std::filesystem::path& path);

struct Split {
  std::vector<SlotTrace> train;
  std::vector<SlotTrace> test;
};

/// Orders traces by a stable hash of their id; the first n_train go to
/// training and the next n_test to testing.
Split split_train_test(std::vector<SlotTrace> traces, std::size_t n_train, std::size_t n_test);

std::uint64_t id_hash(const std::string& id) noexcept;

}  // namespace edgemig::traces
