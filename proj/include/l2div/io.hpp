#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace l2div::io {

/// Numeric CSV with a header row. Every data cell must parse as a finite double.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd rows;
};

/// Header plus string cells; used for files with non-numeric columns.
struct RawCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

RawCsv parse_raw_csv(const std::string& text, const std::string& source = "<memory>");

/// Column index by name, or ParseError.
std::size_t column(const std::vector<std::string>& header, const std::string& name, const std::string& source);

double parse_number(const std::string& cell, const std::string& source, std::size_t line);

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");

/// Header cells parsed as numbers (functional curve files carry the grid in the header).
Eigen::VectorXd numeric_header(const CsvTable& table, const std::string& source);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& contents);
std::string read_text(const std::filesystem::path& path);

}  // namespace l2div::io
