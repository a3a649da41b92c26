#include "womble/series.hpp"

#include "womble/csv.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace womble {

void VfSeries::validate() const {
  if (days.size() != y.cols()) throw std::invalid_argument("one day per visit required");
  if (days.size() == 0) throw std::invalid_argument("series has no visits");
  if (days(0) != 0.0) throw std::invalid_argument("first visit must be day 0");
  for (Index t = 1; t < days.size(); ++t) {
    if (!(days(t) > days(t - 1))) throw std::invalid_argument("visit days must strictly increase");
  }
  if (!y.allFinite() || (y.array() < 0.0).any()) {
    throw std::invalid_argument("DLS values must be finite and non-negative");
  }
}

VfSeries VfSeries::truncated(double max_day) const {
  Index keep = 0;
  while (keep < days.size() && days(keep) <= max_day) ++keep;
  return {y.leftCols(keep), days.head(keep)};
}

namespace {

struct Cell {
  double day = 0;
  std::map<Index, double> values;
  std::size_t line = 0;
};

}  // namespace

std::vector<PatientSeries> read_series(const std::string& path, const ArealGraph& graph) {
  const auto table = CsvTable::read(path);
  const int c_patient = table.require_column("patient");
  const int c_visit = table.require_column("visit");
  const int c_day = table.require_column("day");
  const int c_loc = table.require_column("location");
  const int c_dls = table.require_column("dls_db");

  std::vector<std::string> order;
  std::map<std::string, std::map<long, Cell>> visits;
  for (const auto& row : table.rows()) {
    const std::string& patient = row.fields[c_patient];
    if (patient.empty()) throw ParseError(path, row.line, "empty patient id");
    const long visit = table.integer(row, c_visit);
    const double day = table.number(row, c_day);
    const long loc_id = table.integer(row, c_loc);
    const double dls = table.number(row, c_dls);
    if (!(dls >= 0.0) || !std::isfinite(dls)) throw ParseError(path, row.line, "dls_db must be >= 0");
    const Index i = graph.index_of(static_cast<int>(loc_id));
    if (i < 0) {
      throw ParseError(path, row.line, "location " + std::to_string(loc_id) +
                                           " is not an informative graph location");
    }
    if (!visits.count(patient)) order.push_back(patient);
    auto& cell = visits[patient][visit];
    if (cell.values.empty()) {
      cell.day = day;
      cell.line = row.line;
    } else if (cell.day != day) {
      throw ParseError(path, row.line, "visit " + std::to_string(visit) + " has conflicting days");
    }
    if (!cell.values.emplace(i, dls).second) {
      throw ParseError(path, row.line, "duplicate location " + std::to_string(loc_id));
    }
  }

  std::vector<PatientSeries> cohort;
  for (const auto& patient : order) {
    const auto& pv = visits[patient];
    VfSeries s;
    s.y.resize(graph.size(), static_cast<Index>(pv.size()));
    s.days.resize(static_cast<Index>(pv.size()));
    Index t = 0;
    for (const auto& [visit, cell] : pv) {
      if (static_cast<Index>(cell.values.size()) != graph.size()) {
        throw ParseError(path, cell.line, "patient " + patient + " visit " + std::to_string(visit) +
                                              " has " + std::to_string(cell.values.size()) +
                                              " locations, expected " + std::to_string(graph.size()));
      }
      s.days(t) = cell.day;
      for (const auto& [i, v] : cell.values) s.y(i, t) = v;
      ++t;
    }
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(path, pv.begin()->second.line, "patient " + patient + ": " + e.what());
    }
    cohort.push_back({patient, std::move(s)});
  }
  return cohort;
}

void write_series(const std::vector<PatientSeries>& cohort, const ArealGraph& graph,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "patient,visit,day,location,dls_db\n";
  for (const auto& p : cohort) {
    for (Index t = 0; t < p.series.num_visits(); ++t) {
      for (Index i = 0; i < p.series.num_locations(); ++i) {
        out << p.patient << ',' << (t + 1) << ',' << format_double(p.series.days(t)) << ','
            << graph.locations()[i].id << ',' << format_double(p.series.y(i, t)) << '\n';
      }
    }
  }
}

std::vector<std::pair<std::string, int>> read_labels(const std::string& path) {
  const auto table = CsvTable::read(path);
  const int c_patient = table.require_column("patient");
  const int c_label = table.require_column("label");
  std::vector<std::pair<std::string, int>> out;
  for (const auto& row : table.rows()) {
    const long v = table.integer(row, c_label);
    if (v != 0 && v != 1) throw ParseError(path, row.line, "label must be 0 or 1");
    out.emplace_back(row.fields[c_patient], static_cast<int>(v));
  }
  return out;
}

}  // namespace womble
