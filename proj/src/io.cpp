#include "l2div/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "l2div/error.hpp"

namespace l2div::io {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

double parse_number(const std::string& cell, const std::string& source, std::size_t line) {
  double v = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || cell.empty())
    throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
  if (!std::isfinite(v))
    throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": non-finite value '" + cell + "'");
  return v;
}

RawCsv parse_raw_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  RawCsv raw;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      raw.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != raw.header.size())
      throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ": expected " +
                                             std::to_string(raw.header.size()) + " fields, found " +
                                             std::to_string(cells.size()));
    raw.rows.push_back(std::move(cells));
    raw.line_numbers.push_back(line_no);
  }
  if (!have_header) throw Error(ErrorCode::ParseError, source + ": missing header row");
  return raw;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const std::string& source) {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw Error(ErrorCode::ParseError, source + ": missing column '" + name + "'");
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  const RawCsv raw = parse_raw_csv(text, source);
  CsvTable table;
  table.header = raw.header;
  table.rows.resize(static_cast<Eigen::Index>(raw.rows.size()), static_cast<Eigen::Index>(raw.header.size()));
  for (std::size_t i = 0; i < raw.rows.size(); ++i)
    for (std::size_t j = 0; j < raw.header.size(); ++j)
      table.rows(i, j) = parse_number(raw.rows[i][j], source, raw.line_numbers[i]);
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text(path), path.string());
}

Eigen::VectorXd numeric_header(const CsvTable& table, const std::string& source) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t j = 0; j < table.header.size(); ++j) v(j) = parse_number(table.header[j], source, 1);
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << contents;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingReport, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace l2div::io
