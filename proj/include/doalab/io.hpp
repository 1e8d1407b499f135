#pragma once

#include "doalab/ssfns.hpp"
#include "doalab/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace doalab {

/// Shortest round-trip decimal form of a double (to_chars), so repeated runs
/// produce byte-identical files.
std::string format_double(double value);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

/// `angle_deg,power` rows over the whole grid.
void write_spectrum_csv(const SpatialSpectrum& spectrum,
                        const std::filesystem::path& path);

/// One long-format measurement row of a sweep.
struct LongRow {
  std::string method;
  std::string axis_name;
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  std::string metric_name;
  double metric_value = 0.0;
};

void write_long_csv(const std::vector<LongRow>& rows,
                    const std::filesystem::path& path);

/// Split one CSV line on commas (no quoting; our schemas never need it).
std::vector<std::string> split_csv_line(const std::string& line);

double parse_double_field(const std::string& field, const std::string& context);

}  // namespace doalab
