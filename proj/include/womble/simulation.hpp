#pragma once

// Forward simulation from the spatiotemporal model and the coverage study
// comparing the spatiotemporal fit against the spatial-only comparator.

#include "womble/diagnostics.hpp"
#include "womble/sampler.hpp"

#include <string>
#include <vector>

namespace womble {

struct TrueHypers {
  HyperState state;          // delta, T, phi (temporal)
  double phi_independent;    // large phi: effectively independent visits
  Eigen::MatrixXd T_diag;    // Diag(T)
};

TrueHypers true_hypers();

struct SimSetting {
  char label = 'A';
  bool temporal = false;
  bool cross_cov = false;
  int n_visits = 7;
  int n_theta = 20;
  int n_data_per_theta = 5;
};

/// 'A'..'D': (temporal, cross-covariance) = (no, no), (no, yes), (yes, no), (yes, yes).
SimSetting make_setting(char label, int n_visits, int n_theta = 20, int n_data_per_theta = 5);

constexpr double kMeanVisitGap = 117.25;

/// Day 0 then cumulative Poisson(mean_gap) gaps; zero gaps are redrawn.
Eigen::VectorXd sample_visit_schedule(int n_visits, Rng& rng, double mean_gap = kMeanVisitGap);

/// Scales shared by generation and fitting.
struct ModelScales {
  double y_scale = 10.0;
  double dm_scale = 100.0;
  double time_scale = 365.0;
  double rho = 0.99;
};

/// One theta draw with its visit days: vec(theta) ~ MVN(1 (x) delta,
/// Sigma(phi) (x) T) with the setting's phi and T.
struct ThetaDraw {
  Eigen::VectorXd days;
  Eigen::MatrixXd theta;  // (q + 2) x nu, model units
  double true_cv = 0;     // sample SD / mean over visits of exp(theta row 2)
};

ThetaDraw sample_theta(const SimSetting& setting, const TrueHypers& truth, Index num_metrics,
                       const ModelScales& scales, Rng& rng);

/// Latent CAR field per visit (continuous weights), Tobit-clamped, in dB.
VfSeries sample_series(const Eigen::Ref<const Eigen::MatrixXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& days,
                       const ArealGraph& graph, const ModelScales& scales, Rng& rng);

struct SimDataset {
  VfSeries series;
  double true_cv = 0;
  Eigen::MatrixXd theta;
};

SimDataset generate_dataset(const SimSetting& setting, const ArealGraph& graph, const ModelScales& scales, Rng& rng);

/// Per-draw CV over visits of alpha (row k of theta); draws x nu in, draws out.
std::vector<double> row_cvs(const Eigen::Ref<const Eigen::MatrixXd>& values);

struct Estimate {
  double mean = 0;
  double lower = 0;
  double upper = 0;
};

Estimate summarize_cv(const std::vector<double>& cv_draws);

struct StudyBudget {
  SamplerConfig sampler;  // n_iter etc.; hyper defaults when empty
  int threads = 1;
};

struct StudyRow {
  char setting = 'A';
  std::string model;  // "st" or "space"
  int n_visits = 0;
  double bias = 0;
  double mse = 0;
  double ec = 0;
  double mcse_bias = 0;
  double mcse_mse = 0;
  double mcse_ec = 0;
  int n_ok = 0;
  int n_fail = 0;
};

/// One replicate's outcome for one model.
struct ReplicateResult {
  bool ok = false;
  double truth = 0;
  Estimate estimate;
  std::string error;
};

struct StudyReplicate {
  char setting = 'A';
  int theta_index = 0;
  int data_index = 0;
  ReplicateResult st;
  ReplicateResult space;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<StudyReplicate> replicates;
};

/// Runs every setting x theta x dataset replicate; seeds derive from
/// (seed, setting, theta index, dataset index) so the outcome does not
/// depend on the thread count.
StudyResult run_study(const std::vector<SimSetting>& settings, const ArealGraph& graph, const StudyBudget& budget,
                      std::uint64_t seed, const ModelScales& scales = {});

StudyRow aggregate(char setting, const std::string& model, int n_visits, const std::vector<ReplicateResult>& reps);

/// `setting,model,n_visits,bias,mse,ec,mcse_bias,mcse_mse,mcse_ec,n_ok,n_fail`
void write_study(const std::vector<StudyRow>& rows, const std::string& path);

// Labeled cohorts for the diagnostic pipeline.

struct CohortConfig {
  int n_patients = 50;
  double progressing_fraction = 0.5;
  int n_visits = 7;
  // Progressors' log alpha drifts upward (boundaries sharpen) at a rate per
  // model time unit drawn from U(drift_low, drift_high), plus visit-level
  // noise with SD drawn from U(0, alpha_noise).
  double drift_low = 0.5;
  double drift_high = 1.5;
  double alpha_noise = 0.3;
  double mean_decline = 0.1;  // progressors' mu slope per model time unit, drawn from U(0, this)
};

struct LabeledCohort {
  std::vector<PatientSeries> patients;
  std::vector<int> labels;
};

/// Stable patients keep log alpha constant over visits; progressors get a
/// drifting, noisy log alpha and a declining mean. mu and
/// log tau follow the temporal prior of setting D.
LabeledCohort generate_labeled_cohort(const CohortConfig& config, const ArealGraph& graph,
                                      const ModelScales& scales, Rng& rng);

void write_labels(const LabeledCohort& cohort, const std::string& path);

}  // namespace womble
