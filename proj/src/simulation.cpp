#include "womble/simulation.hpp"

#include "womble/csv.hpp"
#include "womble/generative.hpp"
#include "womble/parallel.hpp"
#include "womble/stats.hpp"

#include <cmath>
#include <fstream>

namespace womble {

TrueHypers true_hypers() {
  TrueHypers h;
  h.state.delta = Eigen::Vector3d(2.446, 0.070, 0.974);
  h.state.T.resize(3, 3);
  h.state.T << 0.820, 0.004, -0.028,  //
      0.004, 0.380, -0.191,           //
      -0.028, -0.191, 0.840;
  h.state.phi = 0.163;
  h.phi_independent = 100.0;
  h.T_diag = h.state.T.diagonal().asDiagonal();
  return h;
}

SimSetting make_setting(char label, int n_visits, int n_theta, int n_data_per_theta) {
  SimSetting s;
  s.label = label;
  switch (label) {
    case 'A': break;
    case 'B': s.cross_cov = true; break;
    case 'C': s.temporal = true; break;
    case 'D': s.temporal = s.cross_cov = true; break;
    default: throw std::invalid_argument(std::string("unknown simulation setting '") + label + "'");
  }
  if (n_visits < 2) throw std::invalid_argument("simulation needs at least two visits");
  if (n_theta < 1 || n_data_per_theta < 1) throw std::invalid_argument("replicate counts must be positive");
  s.n_visits = n_visits;
  s.n_theta = n_theta;
  s.n_data_per_theta = n_data_per_theta;
  return s;
}

Eigen::VectorXd sample_visit_schedule(int n_visits, Rng& rng, double mean_gap) {
  if (n_visits < 2) throw std::invalid_argument("a visit schedule needs at least two visits");
  Eigen::VectorXd days(n_visits);
  days(0) = 0;
  for (int t = 1; t < n_visits; ++t) {
    int gap = 0;
    while (gap == 0) gap = poisson(mean_gap, rng);
    days(t) = days(t - 1) + gap;
  }
  return days;
}

std::vector<double> row_cvs(const Eigen::Ref<const Eigen::MatrixXd>& values) {
  if (values.cols() < 2) throw std::invalid_argument("CV over visits needs at least two visits");
  std::vector<double> out(values.rows());
  for (Index d = 0; d < values.rows(); ++d) out[d] = mean_row_cv(values.row(d));
  return out;
}

ThetaDraw sample_theta(const SimSetting& setting, const TrueHypers& truth, Index num_metrics,
                       const ModelScales& scales, Rng& rng) {
  if (num_metrics + 2 != truth.state.delta.size()) {
    throw std::invalid_argument("true hyperparameters are for a single dissimilarity metric");
  }
  ThetaDraw d;
  d.days = sample_visit_schedule(setting.n_visits, rng);
  const double phi = setting.temporal ? truth.state.phi : truth.phi_independent;
  const Eigen::MatrixXd sigma = temporal_correlation(d.days / scales.time_scale, phi, CorrelationFamily::exponential);
  const Eigen::MatrixXd& T = setting.cross_cov ? truth.state.T : truth.T_diag;
  const Eigen::MatrixXd mean = truth.state.delta.replicate(1, setting.n_visits);
  d.theta = sample_matrix_normal(mean, T, sigma, rng);
  d.true_cv = mean_row_cv(d.theta.row(2).array().exp().matrix());
  return d;
}

VfSeries sample_series(const Eigen::Ref<const Eigen::MatrixXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& days,
                       const ArealGraph& graph, const ModelScales& scales, Rng& rng) {
  const ArealGraph model = graph.scaled(scales.dm_scale);
  const Index q = model.num_metrics();
  if (theta.rows() != q + 2) throw std::invalid_argument("theta rows must equal q + 2");
  VfSeries s;
  s.days = days;
  s.y.resize(model.size(), theta.cols());
  for (Index t = 0; t < theta.cols(); ++t) {
    const Eigen::VectorXd alpha = theta.col(t).tail(q).array().exp();
    CarFactor<double> factor(precision_matrix(model, alpha, scales.rho, WeightForm::continuous));
    if (!factor.ok()) throw NumericalError("simulated CAR precision is not positive definite");
    s.y.col(t) = tobit_clamp(sample_car_field(theta(0, t), std::exp(theta(1, t)), factor, rng) * scales.y_scale);
  }
  return s;
}

SimDataset generate_dataset(const SimSetting& setting, const ArealGraph& graph, const ModelScales& scales, Rng& rng) {
  const auto draw = sample_theta(setting, true_hypers(), graph.num_metrics(), scales, rng);
  return {sample_series(draw.theta, draw.days, graph, scales, rng), draw.true_cv, draw.theta};
}

Estimate summarize_cv(const std::vector<double>& cv_draws) {
  return {mean(cv_draws), quantile(cv_draws, 0.025), quantile(cv_draws, 0.975)};
}

namespace {

template <typename Fit>
ReplicateResult attempt(double truth, Fit&& fit) {
  ReplicateResult r;
  r.truth = truth;
  try {
    const auto cvs = fit();
    for (double v : cvs) {
      if (!std::isfinite(v)) throw NumericalError("non-finite CV draw");
    }
    r.estimate = summarize_cv(cvs);
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

}  // namespace

StudyResult run_study(const std::vector<SimSetting>& settings, const ArealGraph& graph, const StudyBudget& budget,
                      std::uint64_t seed, const ModelScales& scales) {
  const TrueHypers truth = true_hypers();
  SamplerConfig config = budget.sampler;
  config.y_scale = scales.y_scale;
  config.dm_scale = scales.dm_scale;
  config.time_scale = scales.time_scale;
  config.rho = scales.rho;
  config.correlation = CorrelationFamily::exponential;
  config.weights = WeightForm::continuous;

  StudyResult out;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const auto& setting = settings[s];
    const int n_theta = setting.n_theta, n_data = setting.n_data_per_theta;
    std::vector<ThetaDraw> thetas(n_theta);
    for (int j = 0; j < n_theta; ++j) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(setting.label), static_cast<std::uint64_t>(j)));
      thetas[j] = sample_theta(setting, truth, graph.num_metrics(), scales, rng);
    }
    std::vector<StudyReplicate> reps(static_cast<std::size_t>(n_theta * n_data));
    parallel_for(n_theta * n_data, budget.threads, [&](int r) {
      const int j = r / n_data, k = r % n_data;
      const std::uint64_t rep_seed =
          derive_seed(derive_seed(seed, static_cast<std::uint64_t>(setting.label), static_cast<std::uint64_t>(j)),
                      static_cast<std::uint64_t>(k) + 1);
      Rng rng(rep_seed);
      const auto& th = thetas[j];
      StudyReplicate rep{setting.label, j, k, {}, {}};
      VfSeries data;
      try {
        data = sample_series(th.theta, th.days, graph, scales, rng);
      } catch (const std::exception& e) {
        rep.st.error = rep.space.error = e.what();
        reps[r] = rep;
        return;
      }
      SamplerConfig cfg = config;
      cfg.seed = derive_seed(rep_seed, 7);
      rep.st = attempt(th.true_cv, [&] { return row_cvs(run_chain(data, graph, cfg).alpha(0)); });
      rep.space = attempt(th.true_cv, [&] { return row_cvs(space_alpha(fit_space_only(data, graph, cfg))); });
      reps[r] = rep;
    });
    std::vector<ReplicateResult> st, space;
    for (const auto& rep : reps) {
      st.push_back(rep.st);
      space.push_back(rep.space);
    }
    out.rows.push_back(aggregate(setting.label, "st", setting.n_visits, st));
    out.rows.push_back(aggregate(setting.label, "space", setting.n_visits, space));
    out.replicates.insert(out.replicates.end(), reps.begin(), reps.end());
  }
  return out;
}

StudyRow aggregate(char setting, const std::string& model, int n_visits, const std::vector<ReplicateResult>& reps) {
  StudyRow row;
  row.setting = setting;
  row.model = model;
  row.n_visits = n_visits;
  std::vector<double> err, sq, cover;
  for (const auto& r : reps) {
    if (!r.ok) {
      ++row.n_fail;
      continue;
    }
    const double e = r.estimate.mean - r.truth;
    err.push_back(e);
    sq.push_back(e * e);
    cover.push_back(r.truth >= r.estimate.lower && r.truth <= r.estimate.upper ? 1.0 : 0.0);
  }
  row.n_ok = static_cast<int>(err.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (err.empty()) {
    row.bias = row.mse = row.ec = row.mcse_bias = row.mcse_mse = row.mcse_ec = nan;
    return row;
  }
  const double n = static_cast<double>(err.size());
  row.bias = mean(err);
  row.mse = mean(sq);
  row.ec = mean(cover);
  row.mcse_bias = err.size() > 1 ? sample_sd(err) / std::sqrt(n) : nan;
  row.mcse_mse = sq.size() > 1 ? sample_sd(sq) / std::sqrt(n) : nan;
  row.mcse_ec = std::sqrt(row.ec * (1 - row.ec) / n);
  return row;
}

void write_study(const std::vector<StudyRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  auto f = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("NA"); };
  out << "setting,model,n_visits,bias,mse,ec,mcse_bias,mcse_mse,mcse_ec,n_ok,n_fail\n";
  for (const auto& r : rows) {
    out << r.setting << ',' << r.model << ',' << r.n_visits << ',' << f(r.bias) << ',' << f(r.mse) << ',' << f(r.ec)
        << ',' << f(r.mcse_bias) << ',' << f(r.mcse_mse) << ',' << f(r.mcse_ec) << ',' << r.n_ok << ','
        << r.n_fail << '\n';
  }
}

LabeledCohort generate_labeled_cohort(const CohortConfig& config, const ArealGraph& graph,
                                      const ModelScales& scales, Rng& rng) {
  if (config.n_patients < 2) throw std::invalid_argument("a cohort needs at least two patients");
  if (!(config.progressing_fraction > 0 && config.progressing_fraction < 1)) {
    throw std::invalid_argument("progressing fraction must lie in (0, 1)");
  }
  if (!(config.drift_low >= 0 && config.drift_high >= config.drift_low && config.alpha_noise >= 0)) {
    throw std::invalid_argument("need 0 <= drift_low <= drift_high and alpha_noise >= 0");
  }
  const TrueHypers truth = true_hypers();
  const SimSetting setting = make_setting('D', config.n_visits);
  const int n_prog = static_cast<int>(std::lround(config.progressing_fraction * config.n_patients));
  const int width = static_cast<int>(std::to_string(config.n_patients).size());

  LabeledCohort cohort;
  for (int p = 0; p < config.n_patients; ++p) {
    const int label = p < n_prog ? 1 : 0;
    auto draw = sample_theta(setting, truth, graph.num_metrics(), scales, rng);
    Eigen::MatrixXd& th = draw.theta;
    // log alpha: one patient-level value, constant over visits for stable eyes
    const double base = truth.state.delta(2) + std::sqrt(truth.state.T(2, 2)) * std_normal(rng);
    th.row(2).setConstant(base);
    if (label) {
      const double drift = config.drift_low + (config.drift_high - config.drift_low) * uniform01(rng);
      const double sd = config.alpha_noise * uniform01(rng);
      const double decline = config.mean_decline * uniform01(rng);
      for (Index t = 0; t < th.cols(); ++t) {
        const double years = draw.days(t) / scales.time_scale;
        th(2, t) += drift * years + sd * std_normal(rng);
        th(0, t) -= decline * years;
      }
    }
    char id[32];
    std::snprintf(id, sizeof id, "P%0*d", width, p + 1);
    cohort.patients.push_back({id, sample_series(th, draw.days, graph, scales, rng)});
    cohort.labels.push_back(label);
  }
  return cohort;
}

void write_labels(const LabeledCohort& cohort, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "patient,label\n";
  for (std::size_t i = 0; i < cohort.patients.size(); ++i) {
    out << cohort.patients[i].patient << ',' << cohort.labels[i] << '\n';
  }
}

}  // namespace womble
