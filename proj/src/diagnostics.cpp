#include "womble/diagnostics.hpp"

#include "womble/csv.hpp"
#include "womble/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace womble {

const std::vector<std::string> kMetricNames = {"st_cv", "space_cv", "mean_cv", "plr_minp"};

namespace {

double row_cv(const Eigen::Ref<const Eigen::RowVectorXd>& r) {
  const double m = r.mean();
  const double sd = std::sqrt((r.array() - m).square().sum() / static_cast<double>(r.size() - 1));
  return sd / m;
}

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }
std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

}  // namespace

double mean_row_cv(const Eigen::Ref<const Eigen::MatrixXd>& values) {
  if (values.cols() < 2) throw std::invalid_argument("CV over visits needs at least two visits");
  if (values.rows() == 0) throw std::invalid_argument("CV over visits needs at least one draw");
  double total = 0;
  for (Index d = 0; d < values.rows(); ++d) total += row_cv(values.row(d));
  return total / static_cast<double>(values.rows());
}

double st_cv(const PosteriorDraws& draws, Index metric) { return mean_row_cv(draws.alpha(metric)); }

Eigen::MatrixXd space_alpha(const std::vector<PosteriorDraws>& per_visit, Index metric) {
  if (per_visit.empty()) throw std::invalid_argument("no per-visit fits");
  const Index n = per_visit.front().size();
  Eigen::MatrixXd a(n, static_cast<Index>(per_visit.size()));
  for (std::size_t t = 0; t < per_visit.size(); ++t) {
    if (per_visit[t].size() != n) throw std::invalid_argument("per-visit fits retain different draw counts");
    a.col(static_cast<Index>(t)) = per_visit[t].alpha(metric).col(0);
  }
  return a;
}

double space_cv(const std::vector<PosteriorDraws>& per_visit, Index metric) {
  return mean_row_cv(space_alpha(per_visit, metric));
}

double mean_cv(const VfSeries& series) {
  if (series.num_visits() < 2) throw std::invalid_argument("mean CV needs at least two visits");
  const Eigen::RowVectorXd means = series.y.colwise().mean();
  if (means.mean() <= 0) throw std::invalid_argument("mean CV undefined for an all-zero series");
  return row_cv(means);
}

double plr_min_p(const VfSeries& series) {
  const Index nu = series.num_visits();
  if (nu < 3) throw std::invalid_argument("pointwise regression needs at least three visits");
  const Eigen::VectorXd x = series.days.array() - series.days.mean();
  const double sxx = x.squaredNorm();
  const boost::math::students_t dist(static_cast<double>(nu - 2));
  double best = 1.0;
  for (Index i = 0; i < series.num_locations(); ++i) {
    const Eigen::VectorXd y = series.y.row(i).transpose().array() - series.y.row(i).mean();
    const double syy = y.squaredNorm();
    if (syy == 0.0) continue;  // zero slope, zero residual: p = 1
    const double slope = x.dot(y) / sxx;
    const double sse = std::max(0.0, (y - slope * x).squaredNorm());
    if (sse <= 1e-14 * syy) return 0.0;  // exact nonzero-slope fit
    const double se = std::sqrt(sse / static_cast<double>(nu - 2) / sxx);
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(slope / se)));
    best = std::min(best, p);
  }
  return best;
}

void write_metrics(const std::vector<MetricRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "patient,st_cv,space_cv,mean_cv,plr_minp,label\n";
  for (const auto& r : records) {
    out << r.patient << ',' << fmt(r.st_cv) << ',' << fmt(r.space_cv) << ',' << fmt(r.mean_cv) << ','
        << fmt(r.plr_minp) << ',' << (r.label ? std::to_string(*r.label) : "") << '\n';
  }
}

std::vector<MetricRecord> read_metrics(const std::string& path) {
  const auto table = CsvTable::read(path);
  const int cp = table.require_column("patient");
  const int cs = table.require_column("st_cv");
  const int csp = table.require_column("space_cv");
  const int cm = table.require_column("mean_cv");
  const int cl = table.require_column("plr_minp");
  const int cy = table.column("label");
  std::vector<MetricRecord> out;
  for (const auto& row : table.rows()) {
    MetricRecord r;
    r.patient = row.fields[cp];
    r.st_cv = table.number(row, cs);
    r.space_cv = table.number(row, csp);
    r.mean_cv = table.number(row, cm);
    r.plr_minp = table.number(row, cl);
    if (cy >= 0 && !row.fields[cy].empty()) r.label = static_cast<int>(table.integer(row, cy));
    out.push_back(std::move(r));
  }
  return out;
}

Standardizer Standardizer::fit(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.rows() < 2) throw std::invalid_argument("standardizing needs at least two rows");
  Standardizer s;
  s.center = x.colwise().mean();
  s.scale.resize(x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    const double sd = std::sqrt((x.col(c).array() - s.center(c)).square().sum() / static_cast<double>(x.rows() - 1));
    s.scale(c) = sd > 0 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  return (x.rowwise() - center).array().rowwise() / scale.array();
}

Eigen::VectorXd LogisticFit::linear_predictor(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() + 1 != coef.size()) throw std::invalid_argument("design matrix does not match the fit");
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(x.rows(), coef(0));
  for (Index c = 0; c < x.cols(); ++c) {
    if (!aliased[c + 1]) eta += coef(c + 1) * x.col(c);
  }
  return eta;
}

Eigen::VectorXd LogisticFit::probabilities(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  return linear_predictor(x).unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
}

namespace {

double logistic_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXi& y) {
  double ll = 0;
  for (Index i = 0; i < eta.size(); ++i) {
    // y * eta - log(1 + e^eta), stable for large |eta|
    const double e = eta(i);
    const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y(i) * e - softplus;
  }
  return ll;
}

}  // namespace

LogisticFit logistic_fit(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXi>& y,
                         std::vector<std::string> names, double tol, int max_iter) {
  const Index n = x.rows();
  if (y.size() != n) throw std::invalid_argument("one label per row required");
  if (n == 0) throw std::invalid_argument("logistic regression on an empty sample");
  for (Index i = 0; i < n; ++i) {
    if (y(i) != 0 && y(i) != 1) throw std::invalid_argument("labels must be 0 or 1");
  }
  if (names.empty()) {
    for (Index c = 0; c < x.cols(); ++c) names.push_back("x" + std::to_string(c + 1));
  }
  if (static_cast<Index>(names.size()) != x.cols()) throw std::invalid_argument("one name per column required");

  LogisticFit fit;
  fit.names.push_back("(Intercept)");
  fit.names.insert(fit.names.end(), names.begin(), names.end());
  fit.aliased.assign(x.cols() + 1, false);
  std::vector<Index> keep;
  for (Index c = 0; c < x.cols(); ++c) {
    if (x.col(c).maxCoeff() == x.col(c).minCoeff()) {
      fit.aliased[c + 1] = true;
    } else {
      keep.push_back(c);
    }
  }
  const Index k = static_cast<Index>(keep.size()) + 1;
  Eigen::MatrixXd design(n, k);
  design.col(0).setOnes();
  for (Index j = 1; j < k; ++j) design.col(j) = x.col(keep[j - 1]);
  const Eigen::VectorXd yd = y.cast<double>();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd eta = design * beta;
  double ll = logistic_loglik(eta, y);
  Eigen::MatrixXd info(k, k);
  auto fitted = [](const Eigen::VectorXd& e) {
    return e.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); }).eval();
  };
  for (fit.iterations = 1; fit.iterations <= max_iter; ++fit.iterations) {
    const Eigen::VectorXd mu = fitted(eta);
    const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).max(1e-300);
    info.noalias() = design.transpose() * w.asDiagonal() * design;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0).all()) {
      fit.separation = true;
      break;
    }
    Eigen::VectorXd step = ldlt.solve(design.transpose() * (yd - mu));
    double ll_new = logistic_loglik(design * (beta + step), y);
    for (int half = 0; half < 30 && !(ll_new >= ll - 1e-12 * std::abs(ll)); ++half) {
      step *= 0.5;
      ll_new = logistic_loglik(design * (beta + step), y);
    }
    beta += step;
    eta = design * beta;
    const double dev_old = -2 * ll, dev = -2 * ll_new;
    ll = ll_new;
    if (std::abs(dev - dev_old) / (std::abs(dev) + 0.1) < tol) {
      fit.converged = true;
      break;
    }
  }
  fit.iterations = std::min(fit.iterations, max_iter);

  const Eigen::VectorXd mu = fitted(eta);
  const double eps = 10 * std::numeric_limits<double>::epsilon();
  if (!fit.converged || (mu.array() < eps).any() || (mu.array() > 1 - eps).any()) fit.separation = true;
  const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).max(1e-300);
  info.noalias() = design.transpose() * w.asDiagonal() * design;
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Index p = x.cols() + 1;
  fit.coef = Eigen::VectorXd::Constant(p, nan);
  fit.se = fit.z = fit.p = fit.coef;
  for (Index j = 0; j < k; ++j) {
    const Index c = j == 0 ? 0 : keep[j - 1] + 1;
    fit.coef(c) = beta(j);
    fit.se(c) = std::sqrt(std::max(0.0, cov(j, j)));
    fit.z(c) = beta(j) / fit.se(c);
    fit.p(c) = 2.0 * normal_cdf(-std::abs(fit.z(c)));
  }
  fit.loglik = ll;
  fit.num_estimated = static_cast<int>(k);
  fit.aic = -2 * ll + 2 * static_cast<double>(k);
  return fit;
}

double likelihood_ratio_p(const LogisticFit& reduced, const LogisticFit& full) {
  const int df = full.num_estimated - reduced.num_estimated;
  if (df <= 0) throw std::invalid_argument("likelihood-ratio test needs a larger full model");
  const double stat = std::max(0.0, 2 * (full.loglik - reduced.loglik));
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), stat));
}

RocResult roc_auc_pauc(const std::vector<double>& scores, const std::vector<int>& labels, double min_spec) {
  if (scores.size() != labels.size()) throw std::invalid_argument("one label per score required");
  if (!(min_spec >= 0 && min_spec < 1)) throw std::domain_error("specificity bound must lie in [0, 1)");
  const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double n_neg = static_cast<double>(std::count(labels.begin(), labels.end(), 0));
  if (n_pos + n_neg != static_cast<double>(labels.size())) throw std::invalid_argument("labels must be 0 or 1");
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("ROC analysis needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult r;
  const double inf = std::numeric_limits<double>::infinity();
  r.curve.push_back({inf, 0.0, 1.0});
  // Counts stay integral so the area is one exact ratio of integers.
  long tp = 0, fp = 0, twice_area = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    const long tp0 = tp, fp0 = fp;
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] ? tp : fp) += 1;
      ++k;
    }
    twice_area += (fp - fp0) * (tp0 + tp);
    const double next = k < order.size() ? scores[order[k]] : -inf;
    const double threshold = std::isfinite(next) ? 0.5 * (s + next) : -inf;
    r.curve.push_back({threshold, static_cast<double>(tp) / n_pos, 1.0 - static_cast<double>(fp) / n_neg});
  }
  r.auc = static_cast<double>(twice_area) / (2 * n_pos * n_neg);

  const double fpr_max = 1.0 - min_spec;
  for (std::size_t k = 1; k < r.curve.size(); ++k) {
    const double x0 = 1 - r.curve[k - 1].spec, x1 = 1 - r.curve[k].spec;
    const double y0 = r.curve[k - 1].sens, y1 = r.curve[k].sens;
    if (x0 < fpr_max && x1 > x0) {
      const double xe = std::min(x1, fpr_max);
      const double ye = y0 + (y1 - y0) * (xe - x0) / (x1 - x0);
      r.pauc += (xe - x0) * (y0 + ye) / 2;
    }
  }
  const double lo = fpr_max * fpr_max / 2;
  r.pauc_mcclish = 0.5 * (1 + (r.pauc - lo) / (fpr_max - lo));
  return r;
}

RocComparison bootstrap_compare(const std::vector<double>& first, const std::vector<double>& second,
                                const std::vector<int>& labels, int resamples, std::uint64_t seed,
                                double min_spec) {
  if (first.size() != labels.size() || second.size() != labels.size()) {
    throw std::invalid_argument("paired scores must share labels");
  }
  if (resamples < 2) throw std::invalid_argument("bootstrap needs at least two resamples");
  const auto a = roc_auc_pauc(first, labels, min_spec);
  const auto b = roc_auc_pauc(second, labels, min_spec);
  RocComparison out;
  out.auc_diff = b.auc - a.auc;
  out.pauc_diff = b.pauc - a.pauc;

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  std::vector<double> d_auc(resamples), d_pauc(resamples);
  std::vector<double> s1(labels.size()), s2(labels.size());
  std::vector<int> l(labels.size());
  for (int r = 0; r < resamples; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::size_t j = 0;
    for (const auto* group : {&pos, &neg}) {
      std::uniform_int_distribution<std::size_t> pick(0, group->size() - 1);
      for (std::size_t k = 0; k < group->size(); ++k, ++j) {
        const std::size_t i = (*group)[pick(rng)];
        s1[j] = first[i];
        s2[j] = second[i];
        l[j] = labels[i];
      }
    }
    const auto ra = roc_auc_pauc(s1, l, min_spec);
    const auto rb = roc_auc_pauc(s2, l, min_spec);
    d_auc[r] = rb.auc - ra.auc;
    d_pauc[r] = rb.pauc - ra.pauc;
  }
  auto p_value = [](double diff, const std::vector<double>& boot) {
    const double sd = sample_sd(boot);
    if (sd == 0) return diff == 0 ? 1.0 : 0.0;
    return 2.0 * normal_cdf(-std::abs(diff) / sd);
  };
  out.auc_p = p_value(out.auc_diff, d_auc);
  out.pauc_p = p_value(out.pauc_diff, d_pauc);
  return out;
}

double threshold_for_specificity(const std::vector<double>& scores, const std::vector<int>& labels,
                                 double min_spec) {
  const auto roc = roc_auc_pauc(scores, labels, min_spec);
  // Sensitivity rises and specificity falls along the sweep, so the last
  // admissible point has the highest sensitivity and the smallest threshold.
  double best = roc.curve.front().threshold;
  for (const auto& pt : roc.curve) {
    if (pt.spec >= min_spec) best = pt.threshold;
  }
  return best;
}

Eigen::MatrixXd metric_matrix(const std::vector<MetricRecord>& records) {
  Eigen::MatrixXd m(static_cast<Index>(records.size()), 4);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    m.row(static_cast<Index>(i)) << r.st_cv, r.space_cv, r.mean_cv, r.plr_minp;
  }
  return m;
}

std::vector<int> metric_labels(const std::vector<MetricRecord>& records) {
  std::vector<int> y;
  for (const auto& r : records) {
    if (!r.label) throw std::invalid_argument("patient " + r.patient + " has no label");
    y.push_back(*r.label);
  }
  return y;
}

namespace {

Eigen::VectorXi to_eigen(const std::vector<int>& v) {
  return Eigen::Map<const Eigen::VectorXi>(v.data(), static_cast<Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Index metric_column(const std::string& name) {
  const auto it = std::find(kMetricNames.begin(), kMetricNames.end(), name);
  if (it == kMetricNames.end()) throw std::invalid_argument("unknown metric '" + name + "'");
  return static_cast<Index>(it - kMetricNames.begin());
}

}  // namespace

std::vector<CoefficientRow> univariate_table(const std::vector<MetricRecord>& records) {
  const auto y = to_eigen(metric_labels(records));
  const Eigen::MatrixXd z = Standardizer::fit(metric_matrix(records)).apply(metric_matrix(records));
  std::vector<CoefficientRow> rows;
  for (Index c = 0; c < z.cols(); ++c) {
    const auto fit = logistic_fit(z.col(c), y, {kMetricNames[c]});
    rows.push_back({kMetricNames[c], fit.coef(1), fit.se(1), fit.p(1), fit.separation});
  }
  return rows;
}

std::vector<ModelSpec> comparison_models() {
  return {{"mean_cv+plr", {"mean_cv", "plr_minp"}},
          {"mean_cv+plr+space_cv", {"mean_cv", "plr_minp", "space_cv"}},
          {"mean_cv+plr+st_cv", {"mean_cv", "plr_minp", "st_cv"}}};
}

Eigen::MatrixXd design_matrix(const Eigen::Ref<const Eigen::MatrixXd>& standardized, const ModelSpec& spec,
                              std::vector<std::string>* names) {
  std::vector<Index> cols;
  for (const auto& m : spec.metrics) cols.push_back(metric_column(m));
  const Index k = static_cast<Index>(cols.size());
  Eigen::MatrixXd x(standardized.rows(), k + k * (k - 1) / 2);
  if (names) names->clear();
  Index j = 0;
  for (Index a = 0; a < k; ++a, ++j) {
    x.col(j) = standardized.col(cols[a]);
    if (names) names->push_back(spec.metrics[a]);
  }
  for (Index a = 0; a < k; ++a) {
    for (Index b = a + 1; b < k; ++b, ++j) {
      x.col(j) = standardized.col(cols[a]).cwiseProduct(standardized.col(cols[b]));
      if (names) names->push_back(spec.metrics[a] + ":" + spec.metrics[b]);
    }
  }
  return x;
}

Eigen::VectorXd FittedModel::probabilities(const Eigen::Ref<const Eigen::MatrixXd>& raw_metrics) const {
  return fit.probabilities(design_matrix(standardizer.apply(raw_metrics), spec));
}

ComparisonResult comparison_table(const std::vector<MetricRecord>& records, int resamples, std::uint64_t seed,
                                  double min_spec) {
  const auto labels = metric_labels(records);
  const auto y = to_eigen(labels);
  const Eigen::MatrixXd raw = metric_matrix(records);
  const auto standardizer = Standardizer::fit(raw);
  const Eigen::MatrixXd z = standardizer.apply(raw);

  ComparisonResult out;
  std::vector<std::vector<double>> probs;
  for (const auto& spec : comparison_models()) {
    std::vector<std::string> names;
    const Eigen::MatrixXd x = design_matrix(z, spec, &names);
    FittedModel m{spec, standardizer, logistic_fit(x, y, names)};
    probs.push_back(to_std(m.fit.probabilities(x)));
    out.roc.push_back(roc_auc_pauc(probs.back(), labels, min_spec));

    ComparisonRow row;
    row.model = spec.name;
    row.aic = m.fit.aic;
    row.auc = out.roc.back().auc;
    row.pauc = out.roc.back().pauc;
    row.pauc_mcclish = out.roc.back().pauc_mcclish;
    row.separation = m.fit.separation;
    if (!out.models.empty()) {
      row.lrt_p = likelihood_ratio_p(out.models.front().fit, m.fit);
      const auto cmp = bootstrap_compare(probs.front(), probs.back(), labels, resamples,
                                         derive_seed(seed, out.models.size()), min_spec);
      row.auc_p = cmp.auc_p;
      row.pauc_p = cmp.pauc_p;
    }
    out.rows.push_back(row);
    out.models.push_back(std::move(m));
  }
  return out;
}

FollowupResult early_followup(const ComparisonResult& end_of_study, const std::vector<MetricRecord>& full,
                              const std::vector<double>& truncation_days, const TruncatedMetrics& metrics,
                              int window, double min_spec) {
  if (window < 1) throw std::invalid_argument("moving window must be at least 1");
  const auto labels = metric_labels(full);
  const Eigen::MatrixXd raw_full = metric_matrix(full);
  std::vector<double> thresholds;
  for (const auto& m : end_of_study.models) {
    thresholds.push_back(threshold_for_specificity(to_std(m.probabilities(raw_full)), labels, min_spec));
  }

  FollowupResult out;
  std::vector<std::vector<FollowupPoint>> per_model(end_of_study.models.size());
  for (double day : truncation_days) {
    std::vector<MetricRecord> used;
    std::vector<int> used_labels;
    for (std::size_t p = 0; p < full.size(); ++p) {
      auto rec = metrics(p, day);
      if (!rec) continue;
      rec->patient = full[p].patient;
      rec->label = labels[p];
      used_labels.push_back(labels[p]);
      used.push_back(std::move(*rec));
    }
    const int skipped = static_cast<int>(full.size() - used.size());
    const bool both = std::count(used_labels.begin(), used_labels.end(), 1) > 0 &&
                      std::count(used_labels.begin(), used_labels.end(), 0) > 0;
    for (std::size_t m = 0; m < end_of_study.models.size(); ++m) {
      const auto& model = end_of_study.models[m];
      FollowupPoint pt;
      pt.max_day = day;
      pt.model = model.spec.name;
      pt.n_used = static_cast<int>(used.size());
      pt.n_skipped = skipped;
      if (!used.empty()) {
        const auto prob = to_std(model.probabilities(metric_matrix(used)));
        for (std::size_t i = 0; i < used.size(); ++i) {
          out.probabilities.push_back({day, model.spec.name, used[i].patient, used_labels[i], prob[i]});
        }
        if (both) {
          pt.pauc = roc_auc_pauc(prob, used_labels, min_spec).pauc;
          double tp = 0, fn = 0, tn = 0, fp = 0;
          for (std::size_t i = 0; i < prob.size(); ++i) {
            const bool positive = prob[i] >= thresholds[m];
            if (used_labels[i]) {
              (positive ? tp : fn) += 1;
            } else {
              (positive ? fp : tn) += 1;
            }
          }
          pt.sens = tp / (tp + fn);
          pt.spec = tn / (tn + fp);
        }
      }
      per_model[m].push_back(pt);
    }
  }
  const int half = window / 2;
  for (auto& series : per_model) {
    for (int k = 0; k < static_cast<int>(series.size()); ++k) {
      double sum = 0;
      int count = 0;
      for (int j = std::max(0, k - half); j <= std::min<int>(static_cast<int>(series.size()) - 1, k + half); ++j) {
        if (std::isfinite(series[j].pauc)) {
          sum += series[j].pauc;
          ++count;
        }
      }
      if (count) series[k].pauc_smoothed = sum / count;
    }
    out.points.insert(out.points.end(), series.begin(), series.end());
  }
  return out;
}

void write_univariate(const std::vector<CoefficientRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "metric,estimate,se,p,separation\n";
  for (const auto& r : rows) {
    out << r.metric << ',' << fmt(r.estimate) << ',' << fmt(r.se) << ',' << fmt(r.p) << ',' << r.separation
        << '\n';
  }
}

void write_comparison(const std::vector<ComparisonRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "model,aic,auc,pauc,pauc_mcclish,lrt_p,auc_p,pauc_p,separation\n";
  for (const auto& r : rows) {
    out << r.model << ',' << fmt(r.aic) << ',' << fmt(r.auc) << ',' << fmt(r.pauc) << ',' << fmt(r.pauc_mcclish)
        << ',' << fmt(r.lrt_p) << ',' << fmt(r.auc_p) << ',' << fmt(r.pauc_p) << ',' << r.separation << '\n';
  }
}

void write_roc(const RocResult& roc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "threshold,sens,spec\n";
  for (const auto& pt : roc.curve) {
    const std::string t = std::isinf(pt.threshold) ? (pt.threshold > 0 ? "Inf" : "-Inf") : fmt(pt.threshold);
    out << t << ',' << fmt(pt.sens) << ',' << fmt(pt.spec) << '\n';
  }
}

void write_followup(const FollowupResult& result, const std::string& points_path,
                    const std::string& probabilities_path) {
  std::ofstream pts(points_path);
  if (!pts) throw std::runtime_error("cannot write " + points_path);
  pts << "max_day,model,n_used,n_skipped,pauc,pauc_smoothed,sens,spec\n";
  for (const auto& p : result.points) {
    pts << fmt(p.max_day) << ',' << p.model << ',' << p.n_used << ',' << p.n_skipped << ',' << fmt(p.pauc) << ','
        << fmt(p.pauc_smoothed) << ',' << fmt(p.sens) << ',' << fmt(p.spec) << '\n';
  }
  std::ofstream prob(probabilities_path);
  if (!prob) throw std::runtime_error("cannot write " + probabilities_path);
  prob << "max_day,model,patient,label,probability\n";
  for (const auto& p : result.probabilities) {
    prob << fmt(p.max_day) << ',' << p.model << ',' << p.patient << ',' << p.label << ',' << fmt(p.probability)
         << '\n';
  }
}

}  // namespace womble
