#include "womble/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace womble {

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& what)
    : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable CsvTable::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  CsvTable table;
  table.path_ = path;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      table.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header_.size()) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(table.header_.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    table.rows_.push_back({line_no, std::move(fields)});
  }
  if (!have_header) throw ParseError(path, 0, "empty file");
  return table;
}

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header_.begin(), header_.end(), name);
  return it == header_.end() ? -1 : static_cast<int>(it - header_.begin());
}

int CsvTable::require_column(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw ParseError(path_, 1, "missing column '" + name + "'");
  return c;
}

double CsvTable::number(const CsvRow& row, int col) const {
  const std::string& s = row.fields.at(col);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path_, row.line, "column '" + header_[col] + "': not a number: '" + s + "'");
  }
}

long CsvTable::integer(const CsvRow& row, int col) const {
  const std::string& s = row.fields.at(col);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(path_, row.line, "column '" + header_[col] + "': not an integer: '" + s + "'");
  }
  return v;
}

bool CsvTable::boolean(const CsvRow& row, int col) const {
  const std::string& s = row.fields.at(col);
  if (s == "1" || s == "true" || s == "TRUE") return true;
  if (s == "0" || s == "false" || s == "FALSE" || s.empty()) return false;
  throw ParseError(path_, row.line, "column '" + header_[col] + "': not a boolean: '" + s + "'");
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace womble
