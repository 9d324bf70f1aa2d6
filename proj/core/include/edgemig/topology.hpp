#pragma once

#include <compare>
#include <cstddef>

namespace edgemig {

/// Rectangular service area split into rows x cols square cells, one edge
/// server per cell. Rows run along latitude, columns along longitude.
struct GridSpec {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;
  int rows = 8;
  int cols = 8;
  double cell_km = 1.0;

  static GridSpec rome();
  static GridSpec san_francisco();
  /// Made-up box near (0, 0) with 1 km cells; used for dataset-free worlds.
  static GridSpec synthetic(int rows, int cols);

  int num_servers() const noexcept { return rows * cols; }
  bool contains(double lat, double lon) const noexcept;
  /// Throws ConfigInvalid when the invariants do not hold.
  void validate() const;
};

struct ServerId {
  int index = 0;

  constexpr ServerId() = default;
  constexpr explicit ServerId(int i) : index(i) {}
  friend constexpr auto operator<=>(ServerId, ServerId) = default;
};

struct Cell {
  int row = 0;
  int col = 0;
  friend constexpr bool operator==(Cell, Cell) = default;
};

/// Position of a user inside the cell that covers it, both in [0, 1].
struct RatePoint {
  double frac_x = 0.5;  // along longitude
  double frac_y = 0.5;  // along latitude
};

ServerId locate_server(double lat, double lon, const GridSpec& grid);
RatePoint rate_point(double lat, double lon, const GridSpec& grid);

ServerId server_of(Cell cell, const GridSpec& grid);
Cell cell_of(ServerId id, const GridSpec& grid);
void check_server(ServerId id, const GridSpec& grid);

/// Latitude/longitude of the centre of a server's cell.
struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};
LatLon cell_center(ServerId id, const GridSpec& grid);

/// Manhattan distance between the two cells.
int hop_distance(ServerId a, ServerId b, const GridSpec& grid);

inline constexpr double kUploadTiersBps[5] = {60e6, 48e6, 36e6, 24e6, 12e6};

/// Wireless upload rate at a sub-cell position. The cell is divided into five
/// concentric square rings around its centre (Chebyshev distance); the
/// innermost ring gets the fastest tier.
double upload_rate(RatePoint p) noexcept;

}  // namespace edgemig
