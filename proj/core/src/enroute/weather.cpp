#include "flightpred/enroute/weather.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "flightpred/error.hpp"
#include "flightpred/textio.hpp"

namespace flightpred::enroute {

namespace {

constexpr std::string_view kMagic = "WXG1\n";

void put_f32(std::string& out, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  char buf[4];
  std::memcpy(buf, &bits, 4);
  out.append(buf, 4);
}

float get_f32(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  return std::bit_cast<float>(bits);
}

}  // namespace

WeatherGrid WeatherGrid::zeros(std::size_t nx, std::size_t ny, double lat0, double lon0, double lat1, double lon1,
                               double level_ft) {
  WeatherGrid g;
  g.nx = nx;
  g.ny = ny;
  g.lat0 = lat0;
  g.lon0 = lon0;
  g.lat1 = lat1;
  g.lon1 = lon1;
  g.level_ft = level_ft;
  g.values.assign(kWeatherChannels * nx * ny, 0.0f);
  return g;
}

double WeatherGrid::lat_of(std::size_t row) const {
  return lat0 + (lat1 - lat0) * static_cast<double>(row) / static_cast<double>(ny - 1);
}

double WeatherGrid::lon_of(std::size_t col) const {
  return lon0 + (lon1 - lon0) * static_cast<double>(col) / static_cast<double>(nx - 1);
}

void WeatherGrid::validate() const {
  if (nx < 3 || ny < 3) {
    throw InvalidArgument("weather grid must be at least 3x3, got " + std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (values.size() != kWeatherChannels * nx * ny) throw InvalidArgument("weather grid: value count mismatch");
  if (!(lat1 > lat0) || !(lon1 > lon0)) throw InvalidArgument("weather grid: bbox must have lat1 > lat0, lon1 > lon0");
  for (double v : {lat0, lat1}) {
    if (!(v >= -90.0 && v <= 90.0)) throw InvalidArgument("weather grid: latitude out of range");
  }
  if (!std::isfinite(level_ft) || !std::isfinite(lon0) || !std::isfinite(lon1)) {
    throw InvalidArgument("weather grid: non-finite header value");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw InvalidArgument("weather grid: non-finite value in channel " +
                            std::string(kWeatherChannelNames[i / (nx * ny)]));
    }
  }
}

std::string encode_wxg1(const WeatherGrid& g) {
  g.validate();
  using textio::format_double;
  std::string out(kMagic);
  out += std::to_string(g.nx) + ' ' + std::to_string(g.ny) + ' ' + format_double(g.level_ft) + ' ' +
         format_double(g.lat0) + ' ' + format_double(g.lon0) + ' ' + format_double(g.lat1) + ' ' +
         format_double(g.lon1);
  for (auto name : kWeatherChannelNames) {
    out += ' ';
    out += name;
  }
  out += '\n';
  out.reserve(out.size() + 4 * g.values.size());
  for (float v : g.values) put_f32(out, v);
  return out;
}

WeatherGrid decode_wxg1(const std::string& bytes) {
  if (bytes.compare(0, kMagic.size(), kMagic) != 0) throw DataError("WXG1: bad magic");
  const auto eol = bytes.find('\n', kMagic.size());
  if (eol == std::string::npos) throw DataError("WXG1: missing header line");
  std::istringstream header(bytes.substr(kMagic.size(), eol - kMagic.size()));
  std::vector<std::string> tok;
  for (std::string t; header >> t;) tok.push_back(t);
  if (tok.size() != 7 + kWeatherChannels) throw DataError("WXG1: header must have 14 fields");
  WeatherGrid g;
  const auto nx = textio::parse_int(tok[0]), ny = textio::parse_int(tok[1]);
  if (!nx || !ny || *nx <= 0 || *ny <= 0) throw DataError("WXG1: bad grid dimensions");
  g.nx = static_cast<std::size_t>(*nx);
  g.ny = static_cast<std::size_t>(*ny);
  double* fields[] = {&g.level_ft, &g.lat0, &g.lon0, &g.lat1, &g.lon1};
  for (std::size_t i = 0; i < 5; ++i) {
    const auto v = textio::parse_double(tok[2 + i]);
    if (!v) throw DataError("WXG1: bad header number '" + tok[2 + i] + "'");
    *fields[i] = *v;
  }
  for (std::size_t c = 0; c < kWeatherChannels; ++c) {
    if (tok[7 + c] != kWeatherChannelNames[c]) {
      throw DataError("WXG1: channel " + std::to_string(c) + " is '" + tok[7 + c] + "', expected " +
                      std::string(kWeatherChannelNames[c]));
    }
  }
  const std::size_t count = kWeatherChannels * g.nx * g.ny;
  if (bytes.size() - eol - 1 != 4 * count) {
    throw DataError("WXG1: payload is " + std::to_string(bytes.size() - eol - 1) + " bytes, expected " +
                    std::to_string(4 * count));
  }
  g.values.resize(count);
  const char* p = bytes.data() + eol + 1;
  for (std::size_t i = 0; i < count; ++i) g.values[i] = get_f32(p + 4 * i);
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("WXG1: ") + e.what());
  }
  return g;
}

void save_wxg1(const std::string& path, const WeatherGrid& g) { textio::write_file(path, encode_wxg1(g)); }

WeatherGrid load_wxg1(const std::string& path) { return decode_wxg1(textio::read_file(path)); }

WeatherGrid extract_window(const WeatherGrid& field, const GeoPoint& centre, std::size_t size) {
  if (size < 3) throw InvalidArgument("extract_window: size must be >= 3");
  const double dlat = (field.lat1 - field.lat0) / static_cast<double>(field.ny - 1);
  const double dlon = (field.lon1 - field.lon0) / static_cast<double>(field.nx - 1);
  const auto r0 = static_cast<long>(std::lround((centre.lat - field.lat0) / dlat)) - static_cast<long>(size / 2);
  const auto c0 =
      static_cast<long>(std::lround(wrap_angle_deg(centre.lon - field.lon0) / dlon)) - static_cast<long>(size / 2);
  WeatherGrid w = WeatherGrid::zeros(size, size, field.lat0 + dlat * static_cast<double>(r0),
                                     field.lon0 + dlon * static_cast<double>(c0),
                                     field.lat0 + dlat * static_cast<double>(r0 + static_cast<long>(size) - 1),
                                     field.lon0 + dlon * static_cast<double>(c0 + static_cast<long>(size) - 1),
                                     field.level_ft);
  const auto clamp_idx = [](long i, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(n) - 1));
  };
  for (std::size_t c = 0; c < kWeatherChannels; ++c) {
    for (std::size_t r = 0; r < size; ++r) {
      const std::size_t fr = clamp_idx(r0 + static_cast<long>(r), field.ny);
      for (std::size_t k = 0; k < size; ++k) {
        w.at(c, r, k) = field.at(c, fr, clamp_idx(c0 + static_cast<long>(k), field.nx));
      }
    }
  }
  return w;
}

std::vector<double> WeatherNormalizer::apply(const WeatherGrid& g) const {
  std::vector<double> out(g.values.size());
  const std::size_t plane = g.nx * g.ny;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t c = i / plane;
    out[i] = (static_cast<double>(g.values[i]) - mean[c]) / std[c];
  }
  return out;
}

WeatherNormalizer fit_weather_normalizer(const std::vector<const WeatherGrid*>& grids) {
  WeatherNormalizer n;
  std::array<double, kWeatherChannels> s{}, s2{};
  std::array<std::size_t, kWeatherChannels> count{};
  for (const auto* g : grids) {
    const std::size_t plane = g->nx * g->ny;
    for (std::size_t i = 0; i < g->values.size(); ++i) {
      const double v = g->values[i];
      s[i / plane] += v;
      s2[i / plane] += v * v;
      ++count[i / plane];
    }
  }
  for (std::size_t c = 0; c < kWeatherChannels; ++c) {
    if (count[c] == 0) continue;
    n.mean[c] = s[c] / static_cast<double>(count[c]);
    const double var = s2[c] / static_cast<double>(count[c]) - n.mean[c] * n.mean[c];
    const double sd = std::sqrt(std::max(var, 0.0));
    // Constant channels (or the zeroed C1 input) keep unit scale.
    n.std[c] = sd > 1e-12 * std::max(1.0, std::abs(n.mean[c])) ? sd : 1.0;
  }
  return n;
}

}  // namespace flightpred::enroute
