#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "flightpred/constraints/geo.hpp"

namespace flightpred::enroute {

inline constexpr std::size_t kWeatherChannels = 7;
/// Channel order of every grid and file.
inline constexpr std::array<std::string_view, kWeatherChannels> kWeatherChannelNames = {
    "HGT", "TMP", "RH", "VVEL", "UGRD", "VGRD", "ABSV"};
enum WeatherChannel : std::size_t { kHGT = 0, kTMP, kRH, kVVEL, kUGRD, kVGRD, kABSV };

/// Single-level weather plane. Grid nodes span the bbox inclusively: row 0 is
/// lat0, row ny-1 is lat1, column 0 is lon0, column nx-1 is lon1.
struct WeatherGrid {
  double lat0 = 0.0, lon0 = 0.0, lat1 = 0.0, lon1 = 0.0;
  std::size_t nx = 0, ny = 0;
  double level_ft = 0.0;
  std::vector<float> values;  // [channel][row][col]

  static WeatherGrid zeros(std::size_t nx, std::size_t ny, double lat0, double lon0, double lat1, double lon1,
                           double level_ft);

  std::size_t index(std::size_t c, std::size_t row, std::size_t col) const { return (c * ny + row) * nx + col; }
  float at(std::size_t c, std::size_t row, std::size_t col) const { return values[index(c, row, col)]; }
  float& at(std::size_t c, std::size_t row, std::size_t col) { return values[index(c, row, col)]; }
  double lat_of(std::size_t row) const;
  double lon_of(std::size_t col) const;

  /// Throws InvalidArgument: dims below 3x3, wrong value count, non-finite value, degenerate bbox.
  void validate() const;
  friend bool operator==(const WeatherGrid&, const WeatherGrid&) = default;
};

/// "WXG1\n", one header line "nx ny level lat0 lon0 lat1 lon1 HGT TMP RH VVEL UGRD VGRD ABSV\n",
/// then 7*ny*nx little-endian float32 values.
std::string encode_wxg1(const WeatherGrid& g);
/// Throws DataError on a bad magic, header, channel list or payload size.
WeatherGrid decode_wxg1(const std::string& bytes);
void save_wxg1(const std::string& path, const WeatherGrid& g);
WeatherGrid load_wxg1(const std::string& path);

/// size x size block centred on the node nearest to `centre`. Cells outside
/// the field repeat the nearest edge node.
WeatherGrid extract_window(const WeatherGrid& field, const GeoPoint& centre, std::size_t size);

/// Per-channel affine scaling applied before the conv stack.
struct WeatherNormalizer {
  std::array<double, kWeatherChannels> mean{};
  std::array<double, kWeatherChannels> std{1, 1, 1, 1, 1, 1, 1};

  /// [7 * ny * nx] normalized values in grid order.
  std::vector<double> apply(const WeatherGrid& g) const;
};

WeatherNormalizer fit_weather_normalizer(const std::vector<const WeatherGrid*>& grids);

}  // namespace flightpred::enroute
