#pragma once

// Leroux-form CAR with dissimilarity-driven adjacency weights. Everything in
// this header is a pure function templated on the scalar type.

#include "womble/graph.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace womble {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class WeightForm { continuous, threshold };

/// Per-visit observational parameters, stored on the log scale so the
/// hyper-level prior acts on exactly this representation.
template <typename Scalar>
struct ObsParams {
  Scalar mu{0};
  Scalar log_tau{0};
  Vector<Scalar> log_alpha;

  Scalar tau() const { return std::exp(log_tau); }
  Vector<Scalar> alpha() const { return log_alpha.array().exp().matrix(); }

  /// Column layout (mu, log tau, log alpha_1..q).
  Vector<Scalar> to_column() const {
    Vector<Scalar> col(2 + log_alpha.size());
    col << mu, log_tau, log_alpha;
    return col;
  }
  static ObsParams from_column(const Eigen::Ref<const Vector<Scalar>>& col) {
    return {col(0), col(1), col.tail(col.size() - 2)};
  }
};

namespace detail {

template <typename DerivedA>
void check_alpha(const Eigen::MatrixBase<DerivedA>& alpha) {
  for (Index k = 0; k < alpha.size(); ++k) {
    if (alpha(k) < 0 || std::isnan(static_cast<double>(alpha(k)))) {
      throw std::domain_error("dissimilarity coefficients must be non-negative");
    }
  }
}

template <typename Scalar>
void check_rho(Scalar rho) {
  if (!(rho >= 0 && rho < 1)) throw std::domain_error("rho must lie in [0, 1)");
}

template <typename DerivedZ, typename DerivedA>
typename DerivedA::Scalar weighted_dissimilarity(const Eigen::MatrixBase<DerivedZ>& z,
                                                 const Eigen::MatrixBase<DerivedA>& alpha) {
  using Scalar = typename DerivedA::Scalar;
  check_alpha(alpha);
  if ((z.array() < 0).any()) throw std::domain_error("dissimilarity metrics must be non-negative");
  if (z.size() != alpha.size()) throw std::invalid_argument("metric and alpha lengths differ");
  Scalar dot(0);
  for (Index k = 0; k < alpha.size(); ++k) {
    if (alpha(k) != Scalar(0)) dot += Scalar(z(k)) * alpha(k);
  }
  return dot;
}

}  // namespace detail

/// 1(i~j) exp(-z'alpha). A zero alpha component contributes nothing even
/// when paired with an infinite metric.
template <typename DerivedZ, typename DerivedA>
typename DerivedA::Scalar weight(bool adjacent, const Eigen::MatrixBase<DerivedZ>& z,
                                 const Eigen::MatrixBase<DerivedA>& alpha) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar dot = detail::weighted_dissimilarity(z, alpha);
  return adjacent ? std::exp(-dot) : Scalar(0);
}

/// Binary comparator weight: 1 iff adjacent and exp(-z'alpha) >= 0.5.
template <typename DerivedZ, typename DerivedA>
typename DerivedA::Scalar threshold_weight(bool adjacent, const Eigen::MatrixBase<DerivedZ>& z,
                                           const Eigen::MatrixBase<DerivedA>& alpha) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar dot = detail::weighted_dissimilarity(z, alpha);
  if (!adjacent) return Scalar(0);
  // exp(-ln 2) may round below 0.5, so the exponent itself decides at the boundary.
  return (std::exp(-dot) >= Scalar(0.5) || dot <= std::numbers::ln2_v<Scalar>) ? Scalar(1)
                                                                               : Scalar(0);
}

/// Weight of every edge, in graph edge order.
template <typename DerivedA>
Vector<typename DerivedA::Scalar> edge_weights(const ArealGraph& graph,
                                               const Eigen::MatrixBase<DerivedA>& alpha,
                                               WeightForm form = WeightForm::continuous) {
  using Scalar = typename DerivedA::Scalar;
  if (alpha.size() != graph.num_metrics()) {
    throw std::invalid_argument("alpha length differs from the graph metric count");
  }
  Vector<Scalar> w(graph.num_edges());
  for (Index e = 0; e < graph.num_edges(); ++e) {
    const auto& z = graph.edges()[e].z;
    w(e) = form == WeightForm::continuous ? weight(true, z, alpha) : threshold_weight(true, z, alpha);
  }
  return w;
}

/// Q = rho W* + (1 - rho) I with W* the weighted graph Laplacian.
template <typename DerivedW>
Matrix<typename DerivedW::Scalar> precision_from_weights(const ArealGraph& graph,
                                                         const Eigen::MatrixBase<DerivedW>& weights,
                                                         typename DerivedW::Scalar rho) {
  using Scalar = typename DerivedW::Scalar;
  detail::check_rho(rho);
  const Index n = graph.size();
  Matrix<Scalar> q = Matrix<Scalar>::Zero(n, n);
  q.diagonal().setConstant(1 - rho);
  for (Index e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edges()[e];
    const Scalar rw = rho * weights(e);
    q(edge.i, edge.j) -= rw;
    q(edge.j, edge.i) -= rw;
    q(edge.i, edge.i) += rw;
    q(edge.j, edge.j) += rw;
  }
  return q;
}

template <typename DerivedA>
Matrix<typename DerivedA::Scalar> precision_matrix(const ArealGraph& graph,
                                                   const Eigen::MatrixBase<DerivedA>& alpha,
                                                   typename DerivedA::Scalar rho,
                                                   WeightForm form = WeightForm::continuous) {
  return precision_from_weights(graph, edge_weights(graph, alpha, form), rho);
}

template <typename Scalar>
struct Conditional {
  Scalar mean;
  Scalar variance;
};

/// Full conditional of site i given the rest of the field.
template <typename DerivedPhi, typename DerivedW>
Conditional<typename DerivedPhi::Scalar> car_conditional(
    Index i, const Eigen::MatrixBase<DerivedPhi>& phi, typename DerivedPhi::Scalar mu,
    typename DerivedPhi::Scalar tau, const ArealGraph& graph,
    const Eigen::MatrixBase<DerivedW>& weights, typename DerivedPhi::Scalar rho) {
  using Scalar = typename DerivedPhi::Scalar;
  if (!(rho >= 0 && rho <= 1)) throw std::domain_error("rho must lie in [0, 1]");
  Scalar wsum(0), wphi(0);
  for (const auto& [j, e] : graph.neighbors(i)) {
    wsum += weights(e);
    wphi += weights(e) * phi(j);
  }
  const Scalar denom = rho * wsum + (1 - rho);
  if (!(denom > 0)) throw std::domain_error("conditional undefined: no neighbours and rho = 1");
  return {(rho * wphi + (1 - rho) * mu) / denom, tau * tau / denom};
}

/// Cholesky of a CAR precision with its log-determinant.
template <typename Scalar>
class CarFactor {
 public:
  CarFactor() = default;
  explicit CarFactor(Matrix<Scalar> q) : q_(std::move(q)), llt_(q_) {
    ok_ = llt_.info() == Eigen::Success;
    if (ok_) {
      log_det_ = 2 * llt_.matrixLLT().diagonal().array().log().sum();
      ok_ = std::isfinite(static_cast<double>(log_det_));
    }
  }

  bool ok() const { return ok_; }
  const Matrix<Scalar>& precision() const { return q_; }
  const Eigen::LLT<Matrix<Scalar>>& llt() const { return llt_; }
  Scalar log_det() const { return log_det_; }

 private:
  Matrix<Scalar> q_;
  Eigen::LLT<Matrix<Scalar>> llt_;
  Scalar log_det_{0};
  bool ok_ = false;
};

/// log MVN(phi | mu 1, tau^2 Q^{-1}) for an already factorized Q.
template <typename DerivedPhi>
typename DerivedPhi::Scalar car_logdensity(const Eigen::MatrixBase<DerivedPhi>& phi,
                                           typename DerivedPhi::Scalar mu,
                                           typename DerivedPhi::Scalar log_tau,
                                           const CarFactor<typename DerivedPhi::Scalar>& factor) {
  using Scalar = typename DerivedPhi::Scalar;
  const Index n = phi.size();
  const Vector<Scalar> r = phi.array() - mu;
  const Scalar quad = r.dot(factor.precision() * r);
  return -Scalar(0.5) * n * std::log(2 * std::numbers::pi_v<Scalar>) - n * log_tau +
         Scalar(0.5) * factor.log_det() - Scalar(0.5) * quad * std::exp(-2 * log_tau);
}

/// Joint CAR log-density; throws NumericalError-style domain errors naming
/// alpha when Q is not positive definite.
template <typename DerivedPhi>
typename DerivedPhi::Scalar joint_car_logdensity(
    const Eigen::MatrixBase<DerivedPhi>& phi, const ObsParams<typename DerivedPhi::Scalar>& params,
    const ArealGraph& graph, typename DerivedPhi::Scalar rho,
    WeightForm form = WeightForm::continuous) {
  using Scalar = typename DerivedPhi::Scalar;
  const Vector<Scalar> alpha = params.alpha();
  CarFactor<Scalar> factor(precision_matrix(graph, alpha, rho, form));
  if (!factor.ok()) {
    std::string a;
    for (Index k = 0; k < alpha.size(); ++k) a += (k ? ", " : "") + std::to_string(alpha(k));
    throw std::runtime_error("CAR precision is not positive definite at alpha = (" + a + ")");
  }
  return car_logdensity(phi, params.mu, params.log_tau, factor);
}

/// Degenerate Tobit likelihood on the log scale: 0 when the latent field
/// reproduces the data (equal where observed, <= 0 where censored), -inf
/// otherwise.
template <typename DerivedY, typename DerivedPhi>
typename DerivedPhi::Scalar tobit_loglik(const Eigen::MatrixBase<DerivedY>& y,
                                         const Eigen::MatrixBase<DerivedPhi>& phi) {
  using Scalar = typename DerivedPhi::Scalar;
  if (y.size() != phi.size()) throw std::invalid_argument("tobit_loglik: size mismatch");
  for (Index i = 0; i < y.size(); ++i) {
    const bool feasible = y(i) == 0 ? phi(i) <= 0 : phi(i) == y(i);
    if (!feasible) return -std::numeric_limits<Scalar>::infinity();
  }
  return Scalar(0);
}

/// Independent Gaussian observation noise with variance `obs_var`.
template <typename DerivedY, typename DerivedPhi>
typename DerivedPhi::Scalar gaussian_loglik(const Eigen::MatrixBase<DerivedY>& y,
                                            const Eigen::MatrixBase<DerivedPhi>& phi,
                                            typename DerivedPhi::Scalar obs_var) {
  using Scalar = typename DerivedPhi::Scalar;
  if (!(obs_var > 0)) throw std::domain_error("observation variance must be positive");
  const Scalar ss = (y.template cast<Scalar>() - phi).squaredNorm();
  return -Scalar(0.5) * y.size() * std::log(2 * std::numbers::pi_v<Scalar> * obs_var) -
         Scalar(0.5) * ss / obs_var;
}

/// ln 2 / min z_ijk: the largest alpha_k for which the closest pair keeps
/// weight at least one half.
double alpha_regularization_bound(const ArealGraph& graph, Index k);

/// dB = 40 - 10 log10(asb).
double db_from_asb(double asb);
double asb_from_db(double db);

}  // namespace womble
