#include "doalab/io.hpp"

#include "doalab/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace doalab {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

void write_spectrum_csv(const SpatialSpectrum& spectrum,
                        const std::filesystem::path& path) {
  std::string body = "angle_deg,power\n";
  for (Index i = 0; i < spectrum.power.size(); ++i) {
    body += format_double(spectrum.grid.angle_deg(i));
    body += ',';
    body += format_double(spectrum.power(i));
    body += '\n';
  }
  write_text_file(path, body);
}

void write_long_csv(const std::vector<LongRow>& rows,
                    const std::filesystem::path& path) {
  std::string body = "method,axis_name,axis_value,seed,metric_name,metric_value\n";
  for (const auto& row : rows) {
    body += row.method;
    body += ',';
    body += row.axis_name;
    body += ',';
    body += format_double(row.axis_value);
    body += ',';
    body += std::to_string(row.seed);
    body += ',';
    body += row.metric_name;
    body += ',';
    body += format_double(row.metric_value);
    body += '\n';
  }
  write_text_file(path, body);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double_field(const std::string& field, const std::string& context) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (begin != end && is_space(*begin)) ++begin;
  while (end != begin && is_space(*(end - 1))) --end;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParseError("bad numeric field '" + field + "' in " + context);
  return value;
}

}  // namespace doalab
