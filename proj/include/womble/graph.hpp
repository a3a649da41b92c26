#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace womble {

using Index = Eigen::Index;

/// One lattice cell. `id` is the 1-based identifier used in files; the
/// internal 0-based index is the position in ArealGraph::locations().
struct Location {
  int id = 0;
  int row = 0;
  int col = 0;
  std::optional<double> angle;  // Garway-Heath angle, degrees in [0, 360)
  bool blind_spot = false;
};

/// Undirected adjacency with its dissimilarity vector; always i < j.
struct Edge {
  Index i = 0;
  Index j = 0;
  Eigen::VectorXd z;
};

enum class DissimilarityMetric { none, garway_heath };

DissimilarityMetric parse_metric(const std::string& name);

/// Minimum arc distance between two angles on the circle, in degrees.
double circular_distance(double x, double y);

/// Areal lattice with adjacency and pairwise dissimilarities. Blind-spot
/// cells are dropped from the model but kept as metadata. Immutable once
/// built.
class ArealGraph {
 public:
  ArealGraph() = default;

  /// Builds from informative locations and an explicit edge list over
  /// internal indices. Validates symmetry-free input (each pair once),
  /// irreflexivity and non-negative metrics.
  ArealGraph(std::vector<Location> locations, std::vector<Edge> edges, Index num_metrics,
             std::vector<Location> blind_spots = {});

  Index size() const { return static_cast<Index>(locations_.size()); }
  Index num_metrics() const { return num_metrics_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }

  const std::vector<Location>& locations() const { return locations_; }
  const std::vector<Location>& blind_spots() const { return blind_spots_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// (neighbor index, edge index) pairs incident to node i.
  const std::vector<std::pair<Index, Index>>& neighbors(Index i) const { return adjacency_[i]; }

  bool adjacent(Index i, Index j) const;

  /// Internal index of a file id, or -1.
  Index index_of(int id) const;

  /// Copy with every dissimilarity divided by `scale`.
  ArealGraph scaled(double scale) const;

 private:
  std::vector<Location> locations_;
  std::vector<Location> blind_spots_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<Index, Index>>> adjacency_;
  Index num_metrics_ = 0;
};

/// Queen contiguity (edges and corners) over the non-blind-spot cells.
/// Dissimilarities come from `metric`; Garway-Heath requires every angle.
ArealGraph build_queen_adjacency(const std::vector<Location>& grid,
                                 DissimilarityMetric metric = DissimilarityMetric::garway_heath);

/// Attaches dissimilarities to an explicit list of 1-based id pairs.
ArealGraph build_from_edge_list(const std::vector<Location>& grid,
                                const std::vector<std::pair<int, int>>& id_pairs,
                                DissimilarityMetric metric);

/// Reads the `id,row,col,angle,blind_spot` table (angle column optional
/// when metric is none). With `edge_path` the adjacency comes from an
/// `i,j` edge-list CSV instead of the queen rule.
ArealGraph load_graph(const std::string& path, DissimilarityMetric metric,
                      const std::optional<std::string>& edge_path = std::nullopt);

std::vector<Location> read_locations(const std::string& path);

void save_locations(const ArealGraph& graph, const std::string& path);
void save_edge_list(const ArealGraph& graph, const std::string& path);

}  // namespace womble
