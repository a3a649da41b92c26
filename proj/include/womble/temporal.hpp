#pragma once

// Separable matrix-variate prior on the per-visit parameter matrix:
// vec(theta) ~ MVN(1 (x) delta, Sigma(phi) (x) T).

#include "womble/car.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace womble {

enum class CorrelationFamily { exponential, ar1 };

CorrelationFamily parse_correlation(const std::string& name);
std::string to_string(CorrelationFamily family);

/// Correlation between visits `lag` days apart.
///   exponential: exp(-phi lag), phi > 0
///   ar1:         phi^lag,       phi in (0, 1)
template <typename Scalar>
Scalar correlation(CorrelationFamily family, Scalar phi, Scalar lag) {
  switch (family) {
    case CorrelationFamily::exponential:
      return std::exp(-phi * lag);
    case CorrelationFamily::ar1:
      return lag == 0 ? Scalar(1) : std::pow(phi, lag);
  }
  return Scalar(0);
}

template <typename DerivedDays>
Matrix<typename DerivedDays::Scalar> temporal_correlation(
    const Eigen::MatrixBase<DerivedDays>& days, typename DerivedDays::Scalar phi,
    CorrelationFamily family = CorrelationFamily::exponential) {
  using Scalar = typename DerivedDays::Scalar;
  if (family == CorrelationFamily::exponential && !(phi > 0)) {
    throw std::domain_error("exponential correlation needs phi > 0");
  }
  if (family == CorrelationFamily::ar1 && !(phi > 0 && phi < 1)) {
    throw std::domain_error("AR(1) correlation needs phi in (0, 1)");
  }
  const Index nu = days.size();
  Matrix<Scalar> sigma(nu, nu);
  for (Index t = 0; t < nu; ++t) {
    sigma(t, t) = 1;
    for (Index s = 0; s < t; ++s) {
      sigma(t, s) = sigma(s, t) = correlation(family, phi, std::abs(days(t) - days(s)));
    }
  }
  return sigma;
}

/// Support of the uniform prior on phi, chosen so that the longest span
/// between visits can still reach correlation 0.95 and the shortest gap can
/// fall to 0.01. `lower < upper` always.
struct PhiBounds {
  double lower = 0;
  double upper = 0;
};

/// Gap extremes of a visit schedule: the smallest gap between distinct
/// visits and the total span.
struct VisitSpan {
  double min_gap = 0;
  double max_span = 0;
};

VisitSpan visit_span(const Eigen::Ref<const Eigen::VectorXd>& days);

PhiBounds phi_bounds(const Eigen::Ref<const Eigen::VectorXd>& days,
                     CorrelationFamily family = CorrelationFamily::exponential);
PhiBounds phi_bounds(const VisitSpan& span,
                     CorrelationFamily family = CorrelationFamily::exponential);

/// Hyper-level state (delta, T, phi).
struct HyperState {
  Eigen::VectorXd delta;
  Eigen::MatrixXd T;
  double phi = 0;
};

/// Matrix-variate normal log-density of theta (p x nu) with row mean
/// delta, row covariance T and column correlation Sigma. Never forms the
/// Kronecker product: log|Sigma (x) T| = p log|Sigma| + nu log|T| and the
/// quadratic form is ||L_T^{-1} E L_Sigma^{-T}||_F^2 with E = theta - delta 1'.
template <typename DerivedTheta, typename DerivedDelta, typename DerivedT, typename DerivedS>
typename DerivedTheta::Scalar matrix_normal_logdensity(const Eigen::MatrixBase<DerivedTheta>& theta,
                                                       const Eigen::MatrixBase<DerivedDelta>& delta,
                                                       const Eigen::MatrixBase<DerivedT>& row_cov,
                                                       const Eigen::MatrixBase<DerivedS>& col_corr) {
  using Scalar = typename DerivedTheta::Scalar;
  const Index p = theta.rows();
  const Index nu = theta.cols();
  Eigen::LLT<Matrix<Scalar>> llt_t(row_cov);
  Eigen::LLT<Matrix<Scalar>> llt_s(col_corr);
  if (llt_t.info() != Eigen::Success) throw std::runtime_error("T is not positive definite");
  if (llt_s.info() != Eigen::Success) throw std::runtime_error("Sigma(phi) is not positive definite");
  const Scalar logdet_t = 2 * llt_t.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Scalar logdet_s = 2 * llt_s.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Matrix<Scalar> resid = theta.colwise() - delta;
  const Matrix<Scalar> a = llt_t.matrixL().solve(resid);             // p x nu
  const Matrix<Scalar> b = llt_s.matrixL().solve(a.transpose());     // nu x p
  return -Scalar(0.5) * p * nu * std::log(2 * std::numbers::pi_v<Scalar>) -
         Scalar(0.5) * p * logdet_s - Scalar(0.5) * nu * logdet_t - Scalar(0.5) * b.squaredNorm();
}

template <typename DerivedTheta, typename DerivedDays>
typename DerivedTheta::Scalar separable_prior_logdensity(
    const Eigen::MatrixBase<DerivedTheta>& theta, const HyperState& hyper,
    const Eigen::MatrixBase<DerivedDays>& days,
    CorrelationFamily family = CorrelationFamily::exponential) {
  using Scalar = typename DerivedTheta::Scalar;
  if (days.size() != theta.cols()) throw std::invalid_argument("one day per theta column required");
  const Matrix<Scalar> sigma = temporal_correlation(days.template cast<Scalar>().eval(),
                                                    Scalar(hyper.phi), family);
  return matrix_normal_logdensity(theta, hyper.delta.cast<Scalar>(), hyper.T.cast<Scalar>(), sigma);
}

/// Coefficients for the conditional of one column given the rest under a
/// column correlation Sigma: E[theta_t | rest] = delta + sum_s coef(s)
/// (theta_s - delta) over s != t, Cov = scale * T.
struct ColumnConditional {
  Eigen::VectorXd coef;  // length nu, coef(t) = 0
  double scale = 1;
};

std::vector<ColumnConditional> column_conditionals(const Eigen::Ref<const Eigen::MatrixXd>& sigma);

/// Joint conditional of future columns given observed columns under an
/// extended correlation matrix ordered (observed, future):
///   mean  = delta 1' + (theta - delta 1') S_oo^{-1} S_of
///   cov   = (S_ff - S_fo S_oo^{-1} S_of) (x) T
struct FutureConditional {
  Eigen::MatrixXd mean;      // p x m
  Eigen::MatrixXd col_cov;   // m x m
};

FutureConditional condition_future_columns(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                           const Eigen::Ref<const Eigen::VectorXd>& delta,
                                           const Eigen::Ref<const Eigen::MatrixXd>& sigma_full);

}  // namespace womble
