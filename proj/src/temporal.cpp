#include "womble/temporal.hpp"

#include <algorithm>
#include <limits>

namespace womble {

CorrelationFamily parse_correlation(const std::string& name) {
  if (name == "exponential") return CorrelationFamily::exponential;
  if (name == "ar1") return CorrelationFamily::ar1;
  throw std::invalid_argument("unknown correlation family '" + name + "'");
}

std::string to_string(CorrelationFamily family) {
  return family == CorrelationFamily::exponential ? "exponential" : "ar1";
}

VisitSpan visit_span(const Eigen::Ref<const Eigen::VectorXd>& days) {
  if (days.size() < 2) throw std::invalid_argument("phi bounds need at least two visits");
  std::vector<double> sorted(days.data(), days.data() + days.size());
  std::sort(sorted.begin(), sorted.end());
  VisitSpan span;
  span.max_span = sorted.back() - sorted.front();
  span.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t < sorted.size(); ++t) {
    const double gap = sorted[t] - sorted[t - 1];
    if (gap > 0) span.min_gap = std::min(span.min_gap, gap);
  }
  if (!(span.max_span > 0)) throw std::invalid_argument("phi bounds need two distinct visit days");
  return span;
}

namespace {

// Solves correlation(phi, lag) = target for phi by bisection on a
// monotone bracket.
double invert_correlation(CorrelationFamily family, double lag, double target, double lo, double hi) {
  auto f = [&](double phi) { return correlation(family, phi, lag) - target; };
  double flo = f(lo);
  for (int it = 0; it < 400 && hi - lo > 1e-10 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

PhiBounds phi_bounds(const VisitSpan& span, CorrelationFamily family) {
  PhiBounds b;
  switch (family) {
    case CorrelationFamily::exponential:
      b.lower = -std::log(0.95) / span.max_span;
      b.upper = -std::log(0.01) / span.min_gap;
      break;
    case CorrelationFamily::ar1: {
      // phi^lag rises with phi: strong correlation sits at the upper end.
      b.lower = invert_correlation(family, span.min_gap, 0.01, 0.0, 1.0);
      b.upper = invert_correlation(family, span.max_span, 0.95, 0.0, 1.0);
      break;
    }
  }
  if (!(b.lower < b.upper)) {
    throw std::invalid_argument("visit schedule gives empty phi support [" + std::to_string(b.lower) +
                                ", " + std::to_string(b.upper) + "]");
  }
  return b;
}

PhiBounds phi_bounds(const Eigen::Ref<const Eigen::VectorXd>& days, CorrelationFamily family) {
  return phi_bounds(visit_span(days), family);
}

std::vector<ColumnConditional> column_conditionals(const Eigen::Ref<const Eigen::MatrixXd>& sigma) {
  const Index nu = sigma.rows();
  std::vector<ColumnConditional> out(nu);
  for (Index t = 0; t < nu; ++t) {
    auto& c = out[t];
    c.coef = Eigen::VectorXd::Zero(nu);
    if (nu == 1) {
      c.scale = sigma(0, 0);
      continue;
    }
    std::vector<Index> rest;
    for (Index s = 0; s < nu; ++s) {
      if (s != t) rest.push_back(s);
    }
    const Eigen::MatrixXd s_rr = sigma(rest, rest);
    const Eigen::VectorXd s_rt = sigma(rest, t);
    Eigen::LLT<Eigen::MatrixXd> llt(s_rr);
    if (llt.info() != Eigen::Success) throw std::runtime_error("Sigma(phi) is not positive definite");
    const Eigen::VectorXd w = llt.solve(s_rt);
    for (std::size_t k = 0; k < rest.size(); ++k) c.coef(rest[k]) = w(k);
    c.scale = sigma(t, t) - s_rt.dot(w);
    if (!(c.scale > 0)) throw std::runtime_error("Sigma(phi) conditional variance is not positive");
  }
  return out;
}

FutureConditional condition_future_columns(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                           const Eigen::Ref<const Eigen::VectorXd>& delta,
                                           const Eigen::Ref<const Eigen::MatrixXd>& sigma_full) {
  const Index nu = theta.cols();
  const Index m = sigma_full.rows() - nu;
  if (m < 1) throw std::invalid_argument("no future columns requested");
  const Eigen::MatrixXd s_oo = sigma_full.topLeftCorner(nu, nu);
  const Eigen::MatrixXd s_of = sigma_full.topRightCorner(nu, m);
  const Eigen::MatrixXd s_ff = sigma_full.bottomRightCorner(m, m);
  Eigen::LLT<Eigen::MatrixXd> llt(s_oo);
  if (llt.info() != Eigen::Success) throw std::runtime_error("observed Sigma(phi) is not positive definite");
  const Eigen::MatrixXd k = llt.solve(s_of);  // nu x m
  FutureConditional out;
  const Eigen::MatrixXd resid = theta.colwise() - delta;
  out.mean = (resid * k).colwise() + delta;
  out.col_cov = s_ff - s_of.transpose() * k;
  out.col_cov = 0.5 * (out.col_cov + out.col_cov.transpose());
  return out;
}

}  // namespace womble
