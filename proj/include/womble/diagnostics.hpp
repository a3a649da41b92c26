#pragma once

// Progression metrics, logistic regression and ROC analysis.

#include "womble/random.hpp"
#include "womble/sampler.hpp"
#include "womble/series.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace womble {

/// Mean over rows of the per-row coefficient of variation (sample SD over
/// columns / mean over columns). `values` is draws x nu.
double mean_row_cv(const Eigen::Ref<const Eigen::MatrixXd>& values);

/// Posterior mean of the CV of alpha_t over visits (metric k).
double st_cv(const PosteriorDraws& draws, Index metric = 0);
/// alpha draws x nu assembled from per-visit fits, paired by index.
Eigen::MatrixXd space_alpha(const std::vector<PosteriorDraws>& per_visit, Index metric = 0);
/// As st_cv over independently fitted visits; draws are paired by index.
double space_cv(const std::vector<PosteriorDraws>& per_visit, Index metric = 0);
/// CV over visits of the field-wide mean DLS (zeros included).
double mean_cv(const VfSeries& series);
/// Minimum over locations of the two-sided slope p-value of DLS on days.
double plr_min_p(const VfSeries& series);

struct MetricRecord {
  std::string patient;
  double st_cv = 0;
  double space_cv = 0;
  double mean_cv = 0;
  double plr_minp = 1;
  std::optional<int> label;
};

/// `patient,st_cv,space_cv,mean_cv,plr_minp,label` (label empty when unknown).
void write_metrics(const std::vector<MetricRecord>& records, const std::string& path);
std::vector<MetricRecord> read_metrics(const std::string& path);

struct Standardizer {
  Eigen::RowVectorXd center;
  Eigen::RowVectorXd scale;  // sample SD; 1 for constant columns

  static Standardizer fit(const Eigen::Ref<const Eigen::MatrixXd>& x);
  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

struct LogisticFit {
  std::vector<std::string> names;  // "(Intercept)" first
  Eigen::VectorXd coef;            // NaN for aliased columns
  Eigen::VectorXd se;
  Eigen::VectorXd z;
  Eigen::VectorXd p;
  std::vector<bool> aliased;
  double loglik = 0;
  double aic = 0;
  int num_estimated = 0;
  int iterations = 0;
  bool converged = false;
  bool separation = false;

  /// Linear predictor with an implicit intercept.
  Eigen::VectorXd linear_predictor(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  Eigen::VectorXd probabilities(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

/// Maximum likelihood by iteratively reweighted least squares on [1, x].
/// Zero-variance columns are aliased out. Converges when the relative
/// deviance change drops below `tol`.
LogisticFit logistic_fit(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXi>& y,
                         std::vector<std::string> names = {}, double tol = 1e-10, int max_iter = 100);

/// Nested likelihood-ratio test p-value.
double likelihood_ratio_p(const LogisticFit& reduced, const LogisticFit& full);

struct RocPoint {
  double threshold = 0;  // positive when score >= threshold
  double sens = 0;
  double spec = 0;
};

struct RocResult {
  std::vector<RocPoint> curve;  // from threshold +inf down to -inf
  double auc = 0;
  double pauc = 0;           // raw area over specificity [min_spec, 1]
  double pauc_mcclish = 0;   // standardized to [0.5, 1] for a non-inferior curve
};

/// Empirical ROC by a threshold sweep at midpoints between distinct
/// scores; tied scores move sensitivity and specificity together, which
/// the trapezoid rule credits by one half.
RocResult roc_auc_pauc(const std::vector<double>& scores, const std::vector<int>& labels, double min_spec = 0.85);

struct RocComparison {
  double auc_diff = 0;
  double auc_p = 1;
  double pauc_diff = 0;
  double pauc_p = 1;
};

/// Paired, class-stratified bootstrap of (second - first); p-values from
/// the z statistic diff / sd(bootstrap diffs).
RocComparison bootstrap_compare(const std::vector<double>& first, const std::vector<double>& second,
                                const std::vector<int>& labels, int resamples, std::uint64_t seed,
                                double min_spec = 0.85);

/// Maximizes sensitivity subject to specificity >= min_spec; among ties the
/// smallest threshold is returned.
double threshold_for_specificity(const std::vector<double>& scores, const std::vector<int>& labels,
                                 double min_spec = 0.85);

// Cohort-level tables.

struct CoefficientRow {
  std::string metric;
  double estimate = 0;
  double se = 0;
  double p = 1;
  bool separation = false;
};

/// Metric columns in a fixed order: st_cv, space_cv, mean_cv, plr_minp.
Eigen::MatrixXd metric_matrix(const std::vector<MetricRecord>& records);
std::vector<int> metric_labels(const std::vector<MetricRecord>& records);
extern const std::vector<std::string> kMetricNames;

/// One univariate logistic regression per standardized metric.
std::vector<CoefficientRow> univariate_table(const std::vector<MetricRecord>& records);

/// A candidate model: main effects plus all pairwise interactions of the
/// named metrics (with the base pair's interaction always included).
struct ModelSpec {
  std::string name;
  std::vector<std::string> metrics;
};

std::vector<ModelSpec> comparison_models();

/// Standardized design matrix for a model: main effects then pairwise
/// products in (i < j) order.
Eigen::MatrixXd design_matrix(const Eigen::Ref<const Eigen::MatrixXd>& standardized, const ModelSpec& spec,
                              std::vector<std::string>* names = nullptr);

struct ComparisonRow {
  std::string model;
  double aic = 0;
  double auc = 0;
  double pauc = 0;
  double pauc_mcclish = 0;
  std::optional<double> lrt_p;  // vs. base; absent for the base row
  std::optional<double> auc_p;
  std::optional<double> pauc_p;
  bool separation = false;
};

struct FittedModel {
  ModelSpec spec;
  Standardizer standardizer;
  LogisticFit fit;

  Eigen::VectorXd probabilities(const Eigen::Ref<const Eigen::MatrixXd>& raw_metrics) const;
};

struct ComparisonResult {
  std::vector<ComparisonRow> rows;
  std::vector<FittedModel> models;
  std::vector<RocResult> roc;
};

ComparisonResult comparison_table(const std::vector<MetricRecord>& records, int resamples, std::uint64_t seed,
                                  double min_spec = 0.85);

// Early follow-up.

/// Metrics for one patient computed from visits on or before `max_day`;
/// empty when the truncated series is too short.
using TruncatedMetrics = std::function<std::optional<MetricRecord>(std::size_t patient, double max_day)>;

struct FollowupPoint {
  double max_day = 0;
  std::string model;
  int n_used = 0;
  int n_skipped = 0;
  double pauc = std::numeric_limits<double>::quiet_NaN();  // raw; NaN with one class
  double pauc_smoothed = std::numeric_limits<double>::quiet_NaN();
  double sens = std::numeric_limits<double>::quiet_NaN();
  double spec = std::numeric_limits<double>::quiet_NaN();
};

struct FollowupProbability {
  double max_day = 0;
  std::string model;
  std::string patient;
  int label = 0;
  double probability = 0;
};

struct FollowupResult {
  std::vector<FollowupPoint> points;
  std::vector<FollowupProbability> probabilities;
};

/// Scores truncated cohorts with the frozen end-of-study models; the
/// diagnosis threshold per model comes from the full-study scores.
/// Smoothed pAUC is a centered moving average over `window` truncations.
FollowupResult early_followup(const ComparisonResult& end_of_study, const std::vector<MetricRecord>& full,
                              const std::vector<double>& truncation_days, const TruncatedMetrics& metrics,
                              int window = 3, double min_spec = 0.85);

void write_univariate(const std::vector<CoefficientRow>& rows, const std::string& path);
void write_comparison(const std::vector<ComparisonRow>& rows, const std::string& path);
/// `threshold,sens,spec`
void write_roc(const RocResult& roc, const std::string& path);
void write_followup(const FollowupResult& result, const std::string& points_path,
                    const std::string& probabilities_path);

}  // namespace womble
