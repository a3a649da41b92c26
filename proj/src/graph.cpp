#include "womble/graph.hpp"

#include "womble/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace womble {

DissimilarityMetric parse_metric(const std::string& name) {
  if (name == "none") return DissimilarityMetric::none;
  if (name == "garway-heath" || name == "garway_heath") return DissimilarityMetric::garway_heath;
  throw std::invalid_argument("unknown dissimilarity metric '" + name + "'");
}

double circular_distance(double x, double y) {
  if (!(x >= 0.0 && x < 360.0) || !(y >= 0.0 && y < 360.0)) {
    throw std::domain_error("circular_distance: angles must lie in [0, 360)");
  }
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  return std::min(hi - lo, 360.0 - hi + lo);
}

ArealGraph::ArealGraph(std::vector<Location> locations, std::vector<Edge> edges, Index num_metrics,
                       std::vector<Location> blind_spots)
    : locations_(std::move(locations)),
      blind_spots_(std::move(blind_spots)),
      edges_(std::move(edges)),
      adjacency_(locations_.size()),
      num_metrics_(num_metrics) {
  std::set<int> ids;
  for (const auto& loc : locations_) {
    if (loc.blind_spot) throw std::invalid_argument("blind-spot location inside the model graph");
    if (!ids.insert(loc.id).second) {
      throw std::invalid_argument("duplicate location id " + std::to_string(loc.id));
    }
  }
  std::set<std::pair<Index, Index>> seen;
  for (Index e = 0; e < num_edges(); ++e) {
    auto& edge = edges_[e];
    if (edge.i == edge.j) throw std::invalid_argument("self-adjacency is not allowed");
    if (edge.i > edge.j) std::swap(edge.i, edge.j);
    if (edge.i < 0 || edge.j >= size()) throw std::out_of_range("edge endpoint out of range");
    if (edge.z.size() != num_metrics_) {
      throw std::invalid_argument("edge dissimilarity length differs from the metric count");
    }
    if ((edge.z.array() < 0.0).any() || !edge.z.allFinite()) {
      throw std::domain_error("dissimilarities must be finite and non-negative");
    }
    if (!seen.insert({edge.i, edge.j}).second) {
      throw std::invalid_argument("edge listed twice");
    }
    adjacency_[edge.i].emplace_back(edge.j, e);
    adjacency_[edge.j].emplace_back(edge.i, e);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

bool ArealGraph::adjacent(Index i, Index j) const {
  const auto& list = adjacency_.at(i);
  return std::any_of(list.begin(), list.end(), [j](const auto& p) { return p.first == j; });
}

Index ArealGraph::index_of(int id) const {
  for (Index i = 0; i < size(); ++i) {
    if (locations_[i].id == id) return i;
  }
  return -1;
}

ArealGraph ArealGraph::scaled(double scale) const {
  if (!(scale > 0.0)) throw std::domain_error("dissimilarity scale must be positive");
  auto edges = edges_;
  for (auto& e : edges) e.z /= scale;
  return ArealGraph(locations_, std::move(edges), num_metrics_, blind_spots_);
}

namespace {

Eigen::VectorXd dissimilarity(const Location& a, const Location& b, DissimilarityMetric metric) {
  if (metric == DissimilarityMetric::none) return Eigen::VectorXd(0);
  if (!a.angle || !b.angle) {
    throw std::invalid_argument("location " + std::to_string(!a.angle ? a.id : b.id) +
                                " has no angle but the garway-heath metric was requested");
  }
  Eigen::VectorXd z(1);
  z(0) = circular_distance(*a.angle, *b.angle);
  return z;
}

Index metric_count(DissimilarityMetric metric) {
  return metric == DissimilarityMetric::garway_heath ? 1 : 0;
}

void split_blind_spots(const std::vector<Location>& grid, std::vector<Location>& informative,
                       std::vector<Location>& blind) {
  std::set<int> ids;
  for (const auto& loc : grid) {
    if (!ids.insert(loc.id).second) {
      throw std::invalid_argument("duplicate location id " + std::to_string(loc.id));
    }
    (loc.blind_spot ? blind : informative).push_back(loc);
  }
}

}  // namespace

ArealGraph build_queen_adjacency(const std::vector<Location>& grid, DissimilarityMetric metric) {
  std::set<std::pair<int, int>> cells;
  for (const auto& loc : grid) {
    if (!cells.insert({loc.row, loc.col}).second) {
      throw std::invalid_argument("duplicate grid coordinate (" + std::to_string(loc.row) + ", " +
                                  std::to_string(loc.col) + ")");
    }
  }
  std::vector<Location> informative, blind;
  split_blind_spots(grid, informative, blind);

  std::vector<Edge> edges;
  const auto n = static_cast<Index>(informative.size());
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const auto& a = informative[i];
      const auto& b = informative[j];
      if (std::abs(a.row - b.row) <= 1 && std::abs(a.col - b.col) <= 1) {
        edges.push_back({i, j, dissimilarity(a, b, metric)});
      }
    }
  }
  return ArealGraph(std::move(informative), std::move(edges), metric_count(metric), std::move(blind));
}

ArealGraph build_from_edge_list(const std::vector<Location>& grid,
                                const std::vector<std::pair<int, int>>& id_pairs,
                                DissimilarityMetric metric) {
  std::vector<Location> informative, blind;
  split_blind_spots(grid, informative, blind);
  std::map<int, Index> index;
  for (Index i = 0; i < static_cast<Index>(informative.size()); ++i) index[informative[i].id] = i;

  std::map<std::pair<Index, Index>, int> declared;
  for (const auto& [a, b] : id_pairs) {
    const auto ia = index.find(a);
    const auto ib = index.find(b);
    if (ia == index.end() || ib == index.end()) {
      throw std::invalid_argument("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                  ") references an unknown or blind-spot location");
    }
    declared[{ia->second, ib->second}] += 1;
  }
  // An edge list may give each pair once, or both directions; a one-way
  // entry next to two-way entries is a non-symmetric declaration.
  bool any_two_way = false;
  for (const auto& [key, count] : declared) {
    if (key.first != key.second && declared.count({key.second, key.first})) any_two_way = true;
  }
  std::vector<Edge> edges;
  for (const auto& [key, count] : declared) {
    const auto [i, j] = key;
    if (i == j) throw std::invalid_argument("self-adjacency is not allowed");
    const bool reverse = declared.count({j, i}) > 0;
    if (any_two_way && !reverse) {
      throw std::invalid_argument("adjacency is not symmetric: (" +
                                  std::to_string(informative[i].id) + ", " +
                                  std::to_string(informative[j].id) + ") has no reverse entry");
    }
    if (i < j || !reverse) {
      edges.push_back({i, j, dissimilarity(informative[i], informative[j], metric)});
    }
  }
  return ArealGraph(std::move(informative), std::move(edges), metric_count(metric), std::move(blind));
}

std::vector<Location> read_locations(const std::string& path) {
  const auto table = CsvTable::read(path);
  const int c_id = table.require_column("id");
  const int c_row = table.require_column("row");
  const int c_col = table.require_column("col");
  const int c_angle = table.column("angle");
  const int c_blind = table.column("blind_spot");
  std::vector<Location> out;
  for (const auto& row : table.rows()) {
    Location loc;
    loc.id = static_cast<int>(table.integer(row, c_id));
    loc.row = static_cast<int>(table.integer(row, c_row));
    loc.col = static_cast<int>(table.integer(row, c_col));
    if (c_blind >= 0) loc.blind_spot = table.boolean(row, c_blind);
    if (c_angle >= 0 && !row.fields[c_angle].empty() && row.fields[c_angle] != "NA") {
      const double a = table.number(row, c_angle);
      if (!(a >= 0.0 && a < 360.0)) {
        throw std::domain_error(path + ":" + std::to_string(row.line) + ": angle " +
                                row.fields[c_angle] + " outside [0, 360)");
      }
      loc.angle = a;
    }
    if (loc.id < 1) throw ParseError(path, row.line, "location ids are 1-based");
    out.push_back(loc);
  }
  return out;
}

ArealGraph load_graph(const std::string& path, DissimilarityMetric metric,
                      const std::optional<std::string>& edge_path) {
  const auto grid = read_locations(path);
  if (!edge_path) return build_queen_adjacency(grid, metric);

  const auto table = CsvTable::read(*edge_path);
  const int ci = table.require_column("i");
  const int cj = table.require_column("j");
  std::vector<std::pair<int, int>> pairs;
  for (const auto& row : table.rows()) {
    pairs.emplace_back(static_cast<int>(table.integer(row, ci)),
                       static_cast<int>(table.integer(row, cj)));
  }
  return build_from_edge_list(grid, pairs, metric);
}

void save_locations(const ArealGraph& graph, const std::string& path) {
  std::vector<Location> all = graph.locations();
  all.insert(all.end(), graph.blind_spots().begin(), graph.blind_spots().end());
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "id,row,col,angle,blind_spot\n";
  for (const auto& loc : all) {
    out << loc.id << ',' << loc.row << ',' << loc.col << ','
        << (loc.angle ? format_double(*loc.angle) : std::string("NA")) << ','
        << (loc.blind_spot ? 1 : 0) << '\n';
  }
}

void save_edge_list(const ArealGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "i,j\n";
  for (const auto& e : graph.edges()) {
    out << graph.locations()[e.i].id << ',' << graph.locations()[e.j].id << '\n';
  }
}

}  // namespace womble
