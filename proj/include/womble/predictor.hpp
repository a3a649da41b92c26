#pragma once

// Posterior predictive sampling for future visits by composition: for each
// retained draw, future parameter columns from their joint conditional
// under the separable prior, then a CAR field per future visit, then the
// Tobit clamp.

#include "womble/graph.hpp"
#include "womble/random.hpp"
#include "womble/sampler.hpp"

#include <string>
#include <vector>

namespace womble {

struct PredictionRequest {
  Eigen::VectorXd future_days;  // strictly increasing, all > last observed day
  double rho = 0.99;
  CorrelationFamily correlation = CorrelationFamily::exponential;
  WeightForm weights = WeightForm::continuous;
};

/// One posterior draw's prediction, in dB.
struct PredictedDraw {
  Eigen::MatrixXd theta;  // (q + 2) x m future columns, model units
  Eigen::MatrixXd phi;    // n x m latent fields, dB
  Eigen::MatrixXd y;      // n x m, max(0, phi)
};

struct Prediction {
  Eigen::VectorXd days;
  std::vector<PredictedDraw> draws;
};

/// Joint conditional of the future columns for one posterior draw.
FutureConditional future_theta_conditional(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                           const Eigen::Ref<const Eigen::VectorXd>& delta, double phi,
                                           const Eigen::Ref<const Eigen::VectorXd>& days,
                                           const Eigen::Ref<const Eigen::VectorXd>& future_days,
                                           CorrelationFamily family);

/// `graph` carries raw dissimilarities; draws carry their own scales.
Prediction sample_ppd(const PosteriorDraws& draws, const ArealGraph& graph, const PredictionRequest& request,
                      Rng& rng);

/// Per-location summary of predicted Y at every future day.
struct PredictionSummary {
  double day = 0;
  int location = 0;
  double mean = 0;
  double sd = 0;
  double lower = 0;
  double upper = 0;
};

std::vector<PredictionSummary> summarize(const Prediction& prediction, const ArealGraph& graph);

/// `draw,day,location,phi,y`
void write_prediction(const Prediction& prediction, const ArealGraph& graph, const std::string& path);
/// `day,location,mean,sd,lower,upper`
void write_prediction_summary(const std::vector<PredictionSummary>& rows, const std::string& path);

}  // namespace womble
