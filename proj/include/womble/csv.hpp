#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace womble {

/// Malformed input file. `line()` is 1-based within the file (0 if unknown).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Failed factorization or non-finite target; carries a state dump.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Minimal comma-separated reader: no quoting, blank lines skipped,
/// surrounding whitespace trimmed.
class CsvTable {
 public:
  static CsvTable read(const std::string& path);

  const std::string& path() const { return path_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<CsvRow>& rows() const { return rows_; }

  /// Column index of `name`, or -1.
  int column(const std::string& name) const;
  int require_column(const std::string& name) const;

  double number(const CsvRow& row, int col) const;
  long integer(const CsvRow& row, int col) const;
  bool boolean(const CsvRow& row, int col) const;

 private:
  std::string path_;
  std::vector<std::string> header_;
  std::vector<CsvRow> rows_;
};

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double value);

}  // namespace womble
