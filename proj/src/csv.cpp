#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sharpbounds/io.hpp"

namespace sharpbounds {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& text, double& value) {
  if (text == "inf" || text == "+inf") {
    value = kInf;
    return true;
  }
  if (text == "-inf") {
    value = -kInf;
    return true;
  }
  if (text.empty()) return false;
  char* end = nullptr;
  value = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size() && std::isfinite(value);
}

}  // namespace

bool CsvTable::has_column(const std::string& name) const {
  for (const std::string& h : header) {
    if (h == name) return true;
  }
  return false;
}

VectorXd CsvTable::column(const std::string& name) const {
  for (size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return data.col(static_cast<Index>(j));
  }
  throw Error(ErrorCode::kColumn, "missing column '" + name + "'");
}

std::vector<std::string> CsvTable::columns_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const std::string& h : header) {
    if (h.rfind(prefix, 0) == 0) out.push_back(h);
  }
  return out;
}

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw Error(ErrorCode::kParse, "CSV has no header");
  table.header = split(trim(line));

  std::vector<std::vector<double>> rows;
  const size_t width = table.header.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(trim(line));
    const std::string where =
        "row " + std::to_string(rows.size() + 1) + " (line " + std::to_string(line_no) + ")";
    if (fields.size() != width) {
      throw Error(ErrorCode::kParse, where + ": expected " + std::to_string(width) +
                                         " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row(width);
    for (size_t j = 0; j < width; ++j) {
      if (!parse_double(fields[j], row[j])) {
        throw Error(ErrorCode::kParse,
                    where + ": column '" + table.header[j] + "' is not a number: '" + fields[j] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  table.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < width; ++j) {
      table.data(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + path);
  return parse_csv(in);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (const auto& row : rows) {
    for (size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_number(row[j]);
    out << '\n';
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + path);
  write_csv(out, header, rows);
}

}  // namespace sharpbounds
