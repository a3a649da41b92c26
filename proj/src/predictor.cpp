#include "womble/predictor.hpp"

#include "womble/csv.hpp"
#include "womble/generative.hpp"
#include "womble/stats.hpp"

#include <fstream>

namespace womble {

FutureConditional future_theta_conditional(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                           const Eigen::Ref<const Eigen::VectorXd>& delta, double phi,
                                           const Eigen::Ref<const Eigen::VectorXd>& days,
                                           const Eigen::Ref<const Eigen::VectorXd>& future_days,
                                           CorrelationFamily family) {
  Eigen::VectorXd all(days.size() + future_days.size());
  all << days, future_days;
  const auto sigma = temporal_correlation(all, phi, family);
  return condition_future_columns(theta, delta, sigma);
}

Prediction sample_ppd(const PosteriorDraws& draws, const ArealGraph& graph, const PredictionRequest& request,
                      Rng& rng) {
  if (draws.size() == 0) throw std::invalid_argument("no posterior draws to predict from");
  const auto& fut = request.future_days;
  if (fut.size() == 0) throw std::invalid_argument("no future days requested");
  if (draws.days.size() == 0) throw std::invalid_argument("posterior draws carry no visit days");
  for (Index k = 0; k < fut.size(); ++k) {
    const double prev = k ? fut(k - 1) : draws.days(draws.days.size() - 1);
    if (!(fut(k) > prev)) {
      throw std::invalid_argument("future day " + format_double(fut(k)) +
                                  " must exceed the last observed or requested day");
    }
  }
  const ArealGraph model_graph = graph.scaled(draws.dm_scale);
  const Index q = model_graph.num_metrics();

  Prediction out;
  out.days = fut;
  out.draws.reserve(draws.size());
  for (Index d = 0; d < draws.size(); ++d) {
    FutureConditional cond;
    try {
      cond = future_theta_conditional(draws.theta[d], draws.delta[d], draws.phi[d], draws.days / draws.time_scale,
                                      fut / draws.time_scale, request.correlation);
    } catch (const std::exception& e) {
      throw NumericalError("conditioning on future days failed (first future day " + format_double(fut(0)) +
                           "): " + e.what());
    }
    // Correlation numerically 1 with the last visit leaves a tiny negative
    // conditional variance; clamp the column covariance's spectrum at 0.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cond.col_cov);
    const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
    for (Index k = 0; k < ev.size(); ++k) {
      if (eig.eigenvalues()(k) < -1e-8) {
        throw NumericalError("future day " + format_double(fut(k)) +
                             " gives a non positive-definite conditional correlation");
      }
    }
    const Eigen::MatrixXd col_root = eig.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    Eigen::LLT<Eigen::MatrixXd> lt(draws.T[d]);
    if (lt.info() != Eigen::Success) throw NumericalError("posterior T draw is not positive definite");
    Eigen::MatrixXd z(cond.mean.rows(), cond.mean.cols());
    for (Index c = 0; c < z.cols(); ++c) z.col(c) = std_normal_vector(z.rows(), rng);

    PredictedDraw pd;
    pd.theta = cond.mean + Eigen::MatrixXd(lt.matrixL()) * z * col_root.transpose();
    pd.phi.resize(model_graph.size(), fut.size());
    for (Index k = 0; k < fut.size(); ++k) {
      const Eigen::VectorXd alpha = pd.theta.col(k).tail(q).array().exp();
      if (!alpha.allFinite()) throw NumericalError("predicted alpha overflowed");
      CarFactor<double> factor(precision_matrix(model_graph, alpha, request.rho, request.weights));
      pd.phi.col(k) = sample_car_field(pd.theta(0, k), std::exp(pd.theta(1, k)), factor, rng) * draws.y_scale;
    }
    pd.y = tobit_clamp(pd.phi);
    out.draws.push_back(std::move(pd));
  }
  return out;
}

std::vector<PredictionSummary> summarize(const Prediction& prediction, const ArealGraph& graph) {
  std::vector<PredictionSummary> rows;
  const Index nd = static_cast<Index>(prediction.draws.size());
  for (Index k = 0; k < prediction.days.size(); ++k) {
    for (Index i = 0; i < graph.size(); ++i) {
      std::vector<double> v(nd);
      for (Index d = 0; d < nd; ++d) v[d] = prediction.draws[d].y(i, k);
      PredictionSummary s;
      s.day = prediction.days(k);
      s.location = graph.locations()[i].id;
      s.mean = mean(v);
      s.sd = nd > 1 ? sample_sd(v) : 0.0;
      s.lower = quantile(v, 0.025);
      s.upper = quantile(v, 0.975);
      rows.push_back(s);
    }
  }
  return rows;
}

void write_prediction(const Prediction& prediction, const ArealGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "draw,day,location,phi,y\n";
  for (std::size_t d = 0; d < prediction.draws.size(); ++d) {
    const auto& pd = prediction.draws[d];
    for (Index k = 0; k < prediction.days.size(); ++k) {
      for (Index i = 0; i < pd.phi.rows(); ++i) {
        out << (d + 1) << ',' << format_double(prediction.days(k)) << ',' << graph.locations()[i].id << ','
            << format_double(pd.phi(i, k)) << ',' << format_double(pd.y(i, k)) << '\n';
      }
    }
  }
}

void write_prediction_summary(const std::vector<PredictionSummary>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "day,location,mean,sd,lower,upper\n";
  for (const auto& r : rows) {
    out << format_double(r.day) << ',' << r.location << ',' << format_double(r.mean) << ','
        << format_double(r.sd) << ',' << format_double(r.lower) << ',' << format_double(r.upper) << '\n';
  }
}

}  // namespace womble
