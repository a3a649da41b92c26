#include "support.hpp"

#include <doctest.h>

#include <fstream>

using namespace womble;
using namespace testing;

namespace {

std::vector<Location> grid(int rows, int cols) {
  std::vector<Location> out;
  int id = 1;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.push_back({id++, r, c, 10.0 * id, false});
  }
  return out;
}

}  // namespace

TEST_CASE("circular distance spot values") {
  CHECK(circular_distance(77, 77) == 0);
  CHECK(circular_distance(350, 10) == 20);
  CHECK(circular_distance(10, 350) == 20);
  CHECK(circular_distance(0, 180) == 180);
  CHECK_THROWS_AS(circular_distance(360, 0), std::domain_error);
  CHECK_THROWS_AS(circular_distance(-1, 0), std::domain_error);
}

TEST_CASE("circular distance is a bounded symmetric metric") {
  Rng rng(11);
  for (int k = 0; k < 2000; ++k) {
    const double a = 360 * uniform01(rng), b = 360 * uniform01(rng), c = 360 * uniform01(rng);
    const double ab = circular_distance(a, b);
    CHECK(ab >= 0);
    CHECK(ab <= 180);
    CHECK(ab == circular_distance(b, a));
    CHECK(circular_distance(a, c) <= ab + circular_distance(b, c) + 1e-12);
  }
}

TEST_CASE("queen adjacency on small grids") {
  const auto g22 = build_queen_adjacency(grid(2, 2));
  CHECK(g22.num_edges() == 6);

  const auto strip = build_queen_adjacency(grid(1, 3), DissimilarityMetric::none);
  CHECK(strip.adjacent(0, 1));
  CHECK(strip.adjacent(1, 2));
  CHECK_FALSE(strip.adjacent(0, 2));
  CHECK(strip.num_metrics() == 0);

  for (int r = 1; r <= 5; ++r) {
    for (int c = 1; c <= 5; ++c) {
      const auto g = build_queen_adjacency(grid(r, c));
      CHECK(g.num_edges() == r * (c - 1) + c * (r - 1) + 2 * (r - 1) * (c - 1));
    }
  }
}

TEST_CASE("duplicate coordinates are rejected") {
  auto locs = grid(2, 2);
  locs[3].row = 0;
  locs[3].col = 0;
  CHECK_THROWS_AS(build_queen_adjacency(locs), std::invalid_argument);
}

TEST_CASE("shipped field layout matches a brute-force neighbour scan") {
  const auto all = read_locations(data_path("vf_24_2.csv"));
  std::vector<Location> informative;
  for (const auto& l : all) {
    if (!l.blind_spot) informative.push_back(l);
  }
  const auto& g = vf_graph();
  REQUIRE(g.size() == 52);
  CHECK(g.blind_spots().size() == 2);
  long pairs = 0;
  double zmin = 1e300;
  for (std::size_t a = 0; a < informative.size(); ++a) {
    for (std::size_t b = a + 1; b < informative.size(); ++b) {
      const bool adj = std::abs(informative[a].row - informative[b].row) <= 1 &&
                       std::abs(informative[a].col - informative[b].col) <= 1;
      const Index ia = g.index_of(informative[a].id), ib = g.index_of(informative[b].id);
      CHECK(g.adjacent(ia, ib) == adj);
      if (adj) {
        ++pairs;
        double d = std::abs(*informative[a].angle - *informative[b].angle);
        d = std::min(d, 360 - d);
        if (d > 0) zmin = std::min(zmin, d);
      }
    }
  }
  CHECK(g.num_edges() == pairs);
  for (Index i = 0; i < g.size(); ++i) {
    long degree = 0;
    for (Index j = 0; j < g.size(); ++j) degree += g.adjacent(i, j);
    CHECK(static_cast<long>(g.neighbors(i).size()) == degree);
  }
  CHECK(alpha_regularization_bound(g, 0) == doctest::Approx(std::log(2.0) / zmin).epsilon(1e-14));
}

TEST_CASE("layout file without angles under metric none") {
  const auto dir = scratch_dir("graph_noangle");
  {
    std::ofstream out(dir / "g.csv");
    out << "id,row,col,blind_spot\n1,0,0,0\n2,0,1,0\n3,1,0,0\n4,1,1,1\n";
  }
  const auto g = load_graph((dir / "g.csv").string(), DissimilarityMetric::none);
  CHECK(g.size() == 3);
  CHECK(g.num_metrics() == 0);
  for (const auto& e : g.edges()) CHECK(e.z.size() == 0);
}

TEST_CASE("angle 360 is a domain error") {
  const auto dir = scratch_dir("graph_360");
  {
    std::ofstream out(dir / "g.csv");
    out << "id,row,col,angle,blind_spot\n1,0,0,10,0\n2,0,1,360.0,0\n";
  }
  CHECK_THROWS_AS(load_graph((dir / "g.csv").string(), DissimilarityMetric::garway_heath), std::domain_error);
}

TEST_CASE("layout and edge list round trip") {
  const auto dir = scratch_dir("graph_roundtrip");
  const auto& g = vf_graph();
  save_locations(g, (dir / "loc.csv").string());
  save_edge_list(g, (dir / "edges.csv").string());
  const auto queen = load_graph((dir / "loc.csv").string(), DissimilarityMetric::garway_heath);
  const auto listed =
      load_graph((dir / "loc.csv").string(), DissimilarityMetric::garway_heath, (dir / "edges.csv").string());
  for (const auto* h : {&queen, &listed}) {
    REQUIRE(h->size() == g.size());
    REQUIRE(h->num_edges() == g.num_edges());
    CHECK(h->blind_spots().size() == g.blind_spots().size());
    for (Index i = 0; i < g.size(); ++i) {
      CHECK(h->locations()[i].id == g.locations()[i].id);
      for (Index j = 0; j < g.size(); ++j) CHECK(h->adjacent(i, j) == g.adjacent(i, j));
    }
    for (Index e = 0; e < g.num_edges(); ++e) {
      const auto& a = g.edges()[e];
      const auto& b = h->edges()[e];
      CHECK(a.i == b.i);
      CHECK(a.j == b.j);
      CHECK(a.z(0) == b.z(0));
    }
  }
}

TEST_CASE("explicit edge lists are validated") {
  const auto locs = grid(2, 2);
  CHECK_THROWS(build_from_edge_list(locs, {{1, 1}}, DissimilarityMetric::garway_heath));
  CHECK_THROWS(build_from_edge_list(locs, {{1, 2}, {2, 1}, {3, 4}}, DissimilarityMetric::garway_heath));
  CHECK(build_from_edge_list(locs, {{1, 2}, {2, 1}}, DissimilarityMetric::garway_heath).num_edges() == 1);
  CHECK_THROWS(build_from_edge_list(locs, {{1, 9}}, DissimilarityMetric::garway_heath));
  const auto g = build_from_edge_list(locs, {{1, 4}}, DissimilarityMetric::garway_heath);
  CHECK(g.num_edges() == 1);
  CHECK(g.adjacent(0, 3));
}

TEST_CASE("scaling divides every dissimilarity") {
  const auto& g = vf_graph();
  const auto s = g.scaled(100);
  for (Index e = 0; e < g.num_edges(); ++e) CHECK(s.edges()[e].z(0) == doctest::Approx(g.edges()[e].z(0) / 100));
}
