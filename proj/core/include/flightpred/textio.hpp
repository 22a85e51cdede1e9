#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flightpred::textio {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);
/// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

/// Whole-field parse; nullopt on trailing garbage or empty input.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string_view trim(std::string_view s);
/// Splits on `sep` without quote handling; fields are trimmed.
std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Reads a whole file; throws IoError.
std::string read_file(const std::string& path);
/// Writes bytes to a file, creating parent directories; throws IoError.
void write_file(const std::string& path, std::string_view bytes);

}  // namespace flightpred::textio
