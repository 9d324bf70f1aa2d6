#include "edgemig/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "edgemig/error.hpp"

namespace edgemig {
namespace {

// Decimal-degree boxes are not exactly representable; a point that is
// mathematically on a cell edge can land a few ulps short of it.
constexpr double kEdgeSnap = 1e-9;

struct AxisPos {
  int index;
  double frac;
};

AxisPos axis_position(double v, double lo, double hi, int n) {
  const double scaled = (v - lo) / (hi - lo) * n;
  int idx = static_cast<int>(std::floor(scaled + kEdgeSnap));
  idx = std::clamp(idx, 0, n - 1);
  const double frac = std::clamp(scaled - idx, 0.0, 1.0);
  return {idx, frac};
}

}  // namespace

GridSpec GridSpec::rome() { return {41.856, 41.928, 12.442, 12.5387, 8, 8, 1.0}; }

GridSpec GridSpec::san_francisco() {
  return {37.709, 37.781, -122.483, -122.391, 8, 8, 1.0};
}

GridSpec GridSpec::synthetic(int rows, int cols) {
  // ~0.009 degrees of latitude per km; longitude uses the same step since the
  // synthetic box is only a coordinate system.
  constexpr double kDegPerKm = 0.009;
  return {0.0, rows * kDegPerKm, 0.0, cols * kDegPerKm, rows, cols, 1.0};
}

bool GridSpec::contains(double lat, double lon) const noexcept {
  return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
}

void GridSpec::validate() const {
  if (!(lat_min < lat_max) || !(lon_min < lon_max))
    throw Error(Errc::ConfigInvalid, "grid bounds must satisfy min < max");
  if (rows < 1 || cols < 1) throw Error(Errc::ConfigInvalid, "grid needs at least one cell");
  if (!(cell_km > 0.0)) throw Error(Errc::ConfigInvalid, "cell_km must be positive");
}

ServerId locate_server(double lat, double lon, const GridSpec& grid) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || !grid.contains(lat, lon))
    throw Error(Errc::OutOfBounds,
                "(" + std::to_string(lat) + ", " + std::to_string(lon) + ") outside grid");
  const auto r = axis_position(lat, grid.lat_min, grid.lat_max, grid.rows);
  const auto c = axis_position(lon, grid.lon_min, grid.lon_max, grid.cols);
  return ServerId(r.index * grid.cols + c.index);
}

RatePoint rate_point(double lat, double lon, const GridSpec& grid) {
  if (!grid.contains(lat, lon))
    throw Error(Errc::OutOfBounds, "rate point outside grid");
  const auto r = axis_position(lat, grid.lat_min, grid.lat_max, grid.rows);
  const auto c = axis_position(lon, grid.lon_min, grid.lon_max, grid.cols);
  return {c.frac, r.frac};
}

void check_server(ServerId id, const GridSpec& grid) {
  if (id.index < 0 || id.index >= grid.num_servers())
    throw Error(Errc::UnknownServer, "server " + std::to_string(id.index));
}

ServerId server_of(Cell cell, const GridSpec& grid) {
  if (cell.row < 0 || cell.row >= grid.rows || cell.col < 0 || cell.col >= grid.cols)
    throw Error(Errc::UnknownServer, "cell outside grid");
  return ServerId(cell.row * grid.cols + cell.col);
}

Cell cell_of(ServerId id, const GridSpec& grid) {
  check_server(id, grid);
  return {id.index / grid.cols, id.index % grid.cols};
}

LatLon cell_center(ServerId id, const GridSpec& grid) {
  const Cell c = cell_of(id, grid);
  const double dlat = (grid.lat_max - grid.lat_min) / grid.rows;
  const double dlon = (grid.lon_max - grid.lon_min) / grid.cols;
  return {grid.lat_min + (c.row + 0.5) * dlat, grid.lon_min + (c.col + 0.5) * dlon};
}

int hop_distance(ServerId a, ServerId b, const GridSpec& grid) {
  const Cell ca = cell_of(a, grid);
  const Cell cb = cell_of(b, grid);
  return std::abs(ca.row - cb.row) + std::abs(ca.col - cb.col);
}

double upload_rate(RatePoint p) noexcept {
  const double d = std::max(std::abs(p.frac_x - 0.5), std::abs(p.frac_y - 0.5));
  int ring = static_cast<int>(std::floor(5.0 * d / 0.5));
  ring = std::clamp(ring, 0, 4);
  return kUploadTiersBps[ring];
}

}  // namespace edgemig
