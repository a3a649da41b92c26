#pragma once

// Shared fixtures and dense brute-force oracles for the test binaries.

#include "womble/car.hpp"
#include "womble/generative.hpp"
#include "womble/graph.hpp"
#include "womble/random.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

namespace testing {

using namespace womble;

inline std::string data_path(const std::string& name) { return std::string(WOMBLE_DATA_DIR) + "/" + name; }

inline const ArealGraph& vf_graph() {
  static const ArealGraph g = load_graph(data_path("vf_24_2.csv"), DissimilarityMetric::garway_heath);
  return g;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("womble_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Random graph on n nodes: each pair is an edge with probability p_edge,
/// metrics uniform on [0, z_max).
inline ArealGraph random_graph(Index n, Index q, Rng& rng, double p_edge = 0.5, double z_max = 3.0) {
  std::vector<Location> locs;
  for (Index i = 0; i < n; ++i) locs.push_back({static_cast<int>(i + 1), 0, static_cast<int>(i), {}, false});
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (uniform01(rng) >= p_edge) continue;
      Eigen::VectorXd z(q);
      for (Index k = 0; k < q; ++k) z(k) = z_max * uniform01(rng);
      edges.push_back({i, j, z});
    }
  }
  return ArealGraph(locs, edges, q);
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

inline Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

/// log MVN density through an eigen-decomposition (no Cholesky).
inline double dense_mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd ev = es.eigenvalues();
  const Eigen::VectorXd u = es.eigenvectors().transpose() * (x - mean);
  double quad = 0;
  for (Index k = 0; k < ev.size(); ++k) quad += u(k) * u(k) / ev(k);
  return -0.5 * x.size() * std::log(2 * std::numbers::pi) - 0.5 * ev.array().log().sum() - 0.5 * quad;
}

/// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(Index p, Rng& rng, double lo = 0.2, double hi = 2.0) {
  Eigen::MatrixXd a(p, p);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = std_normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd qm = qr.householderQ();
  Eigen::VectorXd ev(p);
  for (Index k = 0; k < p; ++k) ev(k) = lo + (hi - lo) * uniform01(rng);
  return qm * ev.asDiagonal() * qm.transpose();
}

inline Eigen::VectorXd random_vector(Index n, Rng& rng, double sd = 1.0) { return sd * std_normal_vector(n, rng); }

/// Strictly increasing days starting at 0.
inline Eigen::VectorXd random_days(Index nu, Rng& rng, double max_gap = 2.0) {
  Eigen::VectorXd d(nu);
  d(0) = 0;
  for (Index t = 1; t < nu; ++t) d(t) = d(t - 1) + 0.05 + max_gap * uniform01(rng);
  return d;
}

/// Dense Leroux precision from an adjacency loop, independent of the library.
inline Eigen::MatrixXd naive_precision(const ArealGraph& g, const Eigen::VectorXd& alpha, double rho) {
  const Index n = g.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j || !g.adjacent(i, j)) continue;
      for (const auto& e : g.edges()) {
        if ((e.i == i && e.j == j) || (e.i == j && e.j == i)) w(i, j) = std::exp(-e.z.dot(alpha));
      }
    }
  }
  Eigen::MatrixXd q = -rho * w;
  for (Index i = 0; i < n; ++i) q(i, i) = rho * w.row(i).sum() + 1 - rho;
  return q;
}

}  // namespace testing
