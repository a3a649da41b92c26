#include "commands.hpp"

#include "womble/csv.hpp"
#include "womble/diagnostics.hpp"
#include "womble/graph.hpp"
#include "womble/parallel.hpp"
#include "womble/predictor.hpp"
#include "womble/sampler.hpp"
#include "womble/series.hpp"
#include "womble/simulation.hpp"
#include "womble/stats.hpp"
#include "womble/version.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace womble::cli {

namespace {

std::mutex log_mutex;

void log(const std::string& line) {
  std::lock_guard lock(log_mutex);
  std::cerr << line << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string seconds_text(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f s", s);
  return buf;
}

std::uint64_t master_seed(const RunConfig& c) { return c.values().at("seed").get<std::uint64_t>(); }

std::uint64_t patient_seed(const RunConfig& c, const std::string& patient) {
  return derive_seed(master_seed(c), fnv1a(patient));
}

WeightForm parse_weights(const std::string& name) {
  if (name == "continuous") return WeightForm::continuous;
  if (name == "threshold") return WeightForm::threshold;
  throw std::invalid_argument("unknown weight form '" + name + "'");
}

std::string to_string(WeightForm w) { return w == WeightForm::continuous ? "continuous" : "threshold"; }

ArealGraph graph_from(const RunConfig& c) {
  std::optional<std::string> edges;
  if (c.has("edges")) edges = c.text("edges");
  return load_graph(c.require_text("graph"), parse_metric(c.text("metric")), edges);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

SamplerConfig sampler_from(const RunConfig& c, Index num_metrics) {
  SamplerConfig s;
  s.n_iter = static_cast<int>(c.integer("n_iter"));
  s.n_burn = static_cast<int>(c.integer("n_burn"));
  s.n_thin = static_cast<int>(c.integer("n_thin"));
  s.seed = master_seed(c);
  s.rho = c.number("rho");
  s.correlation = parse_correlation(c.text("correlation"));
  s.likelihood = parse_likelihood(c.text("likelihood"));
  s.weights = parse_weights(c.text("weights"));
  s.block_theta = c.flag("block_theta");
  s.keep_latent = c.flag("keep_latent");
  s.proposals.target_acceptance = c.number("target_acceptance");
  s.y_scale = c.number("y_scale");
  s.dm_scale = c.number("dm_scale");
  s.time_scale = c.number("time_scale");

  const Index p = num_metrics + 2;
  HyperConfig h = HyperConfig::defaults(num_metrics, c.number("upsilon"));
  const auto sized = [&](const std::string& key) {
    auto v = c.list(key);
    if (static_cast<Index>(v.size()) != p) {
      throw std::invalid_argument(flag_name(key) + " needs q + 2 = " + std::to_string(p) + " values");
    }
    return to_vector(v);
  };
  if (c.has("mu_delta")) h.mu_delta = sized("mu_delta");
  if (c.has("omega_delta")) h.omega_delta = sized("omega_delta").asDiagonal();
  if (c.has("psi")) h.psi = sized("psi").asDiagonal();
  if (c.has("xi")) h.xi = c.number("xi");
  if (c.has("phi_lower") != c.has("phi_upper")) {
    throw std::invalid_argument("--phi-lower and --phi-upper must be given together");
  }
  if (c.has("phi_lower")) h.phi_bounds = PhiBounds{c.number("phi_lower"), c.number("phi_upper")};
  s.hyper = h;
  s.validate(num_metrics);
  return s;
}

std::vector<PatientSeries> select_patients(const RunConfig& c, std::vector<PatientSeries> cohort) {
  if (!c.has("patient")) return cohort;
  const std::string id = c.text("patient");
  const auto it = std::find_if(cohort.begin(), cohort.end(), [&](const auto& p) { return p.patient == id; });
  if (it == cohort.end()) throw std::invalid_argument("patient " + id + " not found in " + c.text("data"));
  return {*it};
}

ojson interval(const std::vector<double>& v) {
  ojson j;
  j["mean"] = mean(v);
  j["sd"] = v.size() > 1 ? sample_sd(v) : 0.0;
  j["lower"] = quantile(v, 0.025);
  j["upper"] = quantile(v, 0.975);
  return j;
}

/// Posterior summaries of theta rows by visit, delta, T and phi.
ojson parameter_summary(const PosteriorDraws& d, Index visit_offset = 0, bool hyper = true) {
  ojson out;
  const Index p = d.num_metrics + 2;
  const Index nu = d.size() ? d.theta.front().cols() : 0;
  const auto row_name = [](Index r) -> std::string {
    if (r == 0) return "mu";
    if (r == 1) return "log_tau";
    return "log_alpha";
  };
  std::vector<double> v(d.size());
  for (Index r = 0; r < p; ++r) {
    for (Index t = 0; t < nu; ++t) {
      for (Index k = 0; k < d.size(); ++k) v[k] = d.theta[k](r, t);
      auto j = interval(v);
      j["visit"] = t + 1 + visit_offset;
      if (r >= 2) j["metric"] = r - 2;
      out[row_name(r)].push_back(j);
      if (r >= 2) {
        for (auto& x : v) x = std::exp(x);
        auto a = interval(v);
        a["visit"] = t + 1 + visit_offset;
        a["metric"] = r - 2;
        out["alpha"].push_back(a);
      }
    }
  }
  if (!hyper) return out;
  for (Index r = 0; r < p; ++r) {
    for (Index k = 0; k < d.size(); ++k) v[k] = d.delta[k](r);
    out["delta"].push_back(interval(v));
  }
  for (Index r = 0; r < p; ++r) {
    for (Index c = 0; c < p; ++c) {
      for (Index k = 0; k < d.size(); ++k) v[k] = d.T[k](r, c);
      auto j = interval(v);
      j["row"] = r;
      j["col"] = c;
      out["T"].push_back(j);
    }
  }
  for (Index k = 0; k < d.size(); ++k) v[k] = d.phi[k];
  out["phi"] = interval(v);
  if (!d.obs_var.empty()) out["obs_var"] = interval(d.obs_var);
  return out;
}

ojson acceptance_json(const std::map<std::string, AcceptanceStats>& acc) {
  ojson j = ojson::object();
  for (const auto& [name, s] : acc) {
    j[name] = {{"rate", s.rate()}, {"proposed", s.proposed}, {"rejected_numerical", s.rejected_numerical}};
  }
  return j;
}

ojson model_json(const SamplerConfig& s, const ArealGraph& graph) {
  ojson j;
  j["rho"] = s.rho;
  j["correlation"] = to_string(s.correlation);
  j["likelihood"] = s.likelihood == Likelihood::tobit ? "tobit" : "gaussian";
  j["weights"] = to_string(s.weights);
  j["y_scale"] = s.y_scale;
  j["dm_scale"] = s.dm_scale;
  j["time_scale"] = s.time_scale;
  const ArealGraph model = graph.scaled(s.dm_scale);
  for (Index k = 0; k < model.num_metrics(); ++k) j["alpha_bound"].push_back(alpha_regularization_bound(model, k));
  return j;
}

void write_json(const ojson& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

ojson days_json(const Eigen::VectorXd& days) {
  ojson j = ojson::array();
  for (Index t = 0; t < days.size(); ++t) j.push_back(days(t));
  return j;
}

std::vector<double> cv_draws_or_empty(const Eigen::MatrixXd& alpha) {
  return alpha.cols() >= 2 ? row_cvs(alpha) : std::vector<double>{};
}

}  // namespace

void write_manifest(const std::string& dir, const std::string& command, const RunConfig& config,
                    std::vector<std::string> outputs) {
  std::sort(outputs.begin(), outputs.end());
  ojson m;
  m["command"] = command;
  m["version"] = kVersion;
  m["seed"] = master_seed(config);
  m["config"] = config.values();
  m["config_hash"] = fnv1a_hex(config.values().dump());
  m["outputs"] = outputs;
  write_json(m, (fs::path(dir) / "manifest.json").string());
}

int cmd_fit(RunConfig& c) {
  const auto graph = graph_from(c);
  const auto cohort = select_patients(c, read_series(c.require_text("data"), graph));
  const auto base = sampler_from(c, graph.num_metrics());
  const bool space_only = c.flag("space_only");
  const fs::path dir = c.text("out");
  fs::create_directories(dir);

  std::vector<std::vector<std::string>> written(cohort.size());
  parallel_for(static_cast<int>(cohort.size()), static_cast<int>(c.integer("threads")), [&](int i) {
    const auto& patient = cohort[i];
    const auto t0 = std::chrono::steady_clock::now();
    SamplerConfig cfg = base;
    cfg.seed = patient_seed(c, patient.patient);
    ojson summary;
    summary["patient"] = patient.patient;
    summary["model"] = space_only ? "spatial" : "spatiotemporal";
    summary["n_visits"] = patient.series.num_visits();
    summary["days"] = days_json(patient.series.days);
    summary["settings"] = model_json(cfg, graph);
    const std::string stem = "draws_" + patient.patient;
    if (space_only) {
      cfg.weights = WeightForm::threshold;
      summary["settings"] = model_json(cfg, graph);
      const auto fits = fit_space_only(patient.series, graph, cfg);
      ojson visits = ojson::array();
      for (std::size_t t = 0; t < fits.size(); ++t) {
        const std::string file = stem + "_visit" + std::to_string(t + 1) + ".csv";
        write_draws(fits[t], graph, (dir / file).string());
        written[i].push_back(file);
        ojson v;
        v["visit"] = t + 1;
        v["n_draws"] = fits[t].size();
        v["parameters"] = parameter_summary(fits[t], static_cast<Index>(t), false);
        v["acceptance"] = acceptance_json(fits[t].acceptance);
        visits.push_back(v);
      }
      summary["visits"] = visits;
      const auto cvs = cv_draws_or_empty(space_alpha(fits));
      if (!cvs.empty()) summary["space_cv"] = interval(cvs);
    } else {
      const auto draws = run_chain(patient.series, graph, cfg);
      write_draws(draws, graph, (dir / (stem + ".csv")).string());
      written[i].push_back(stem + ".csv");
      summary["n_draws"] = draws.size();
      summary["phi_bounds"] = {draws.bounds.lower, draws.bounds.upper};
      summary["parameters"] = parameter_summary(draws);
      summary["acceptance"] = acceptance_json(draws.acceptance);
      const auto cvs = cv_draws_or_empty(draws.alpha(0));
      if (!cvs.empty()) summary["st_cv"] = interval(cvs);
    }
    const std::string file = "summary_" + patient.patient + ".json";
    write_json(summary, (dir / file).string());
    written[i].push_back(file);
    log("fit " + patient.patient + ": " + std::to_string(patient.series.num_visits()) + " visits, " +
        seconds_text(seconds_since(t0)));
  });
  std::vector<std::string> outputs;
  for (auto& w : written) outputs.insert(outputs.end(), w.begin(), w.end());
  write_manifest(dir.string(), "fit", c, outputs);
  return 0;
}

int cmd_predict(RunConfig& c) {
  const auto graph = graph_from(c);
  const fs::path fit_dir = c.require_text("fit_dir");
  const std::string patient = c.require_text("patient");
  if (!c.has("future_days")) throw std::invalid_argument("missing required option --future-days");

  const fs::path summary_path = fit_dir / ("summary_" + patient + ".json");
  std::ifstream in(summary_path);
  if (!in) throw std::invalid_argument("cannot open " + summary_path.string());
  const auto summary = nlohmann::json::parse(in);
  if (summary.at("model") != "spatiotemporal") {
    throw std::invalid_argument("prediction needs a spatiotemporal fit; " + summary_path.string() + " is spatial-only");
  }
  auto draws = read_draws((fit_dir / ("draws_" + patient + ".csv")).string(), graph);
  const auto days = summary.at("days").get<std::vector<double>>();
  const auto& settings = summary.at("settings");
  draws.days = to_vector(days);
  draws.y_scale = settings.at("y_scale").get<double>();
  draws.dm_scale = settings.at("dm_scale").get<double>();
  draws.time_scale = settings.at("time_scale").get<double>();

  PredictionRequest request;
  request.future_days = to_vector(c.list("future_days"));
  request.rho = settings.at("rho").get<double>();
  request.correlation = parse_correlation(settings.at("correlation").get<std::string>());
  request.weights = parse_weights(settings.at("weights").get<std::string>());

  Rng rng(patient_seed(c, patient));
  const auto prediction = sample_ppd(draws, graph, request, rng);
  const fs::path dir = c.text("out");
  fs::create_directories(dir);
  const std::string draws_file = "prediction_" + patient + ".csv";
  const std::string summary_file = "prediction_summary_" + patient + ".csv";
  write_prediction(prediction, graph, (dir / draws_file).string());
  write_prediction_summary(summarize(prediction, graph), (dir / summary_file).string());
  write_manifest(dir.string(), "predict", c, {draws_file, summary_file});
  log("predict " + patient + ": " + std::to_string(prediction.draws.size()) + " draws x " +
      std::to_string(request.future_days.size()) + " days");
  return 0;
}

namespace {

struct PatientMetrics {
  std::optional<MetricRecord> record;
  std::string skipped_reason;
};

/// Fits both models on a series and computes all four metrics.
MetricRecord compute_metrics(const std::string& patient, const VfSeries& series, const ArealGraph& graph,
                             SamplerConfig cfg) {
  MetricRecord r;
  r.patient = patient;
  r.mean_cv = mean_cv(series);
  r.plr_minp = plr_min_p(series);
  r.st_cv = st_cv(run_chain(series, graph, cfg));
  cfg.weights = WeightForm::threshold;
  r.space_cv = space_cv(fit_space_only(series, graph, cfg));
  return r;
}

}  // namespace

int cmd_diagnose(RunConfig& c) {
  const auto graph = graph_from(c);
  const auto cohort = select_patients(c, read_series(c.require_text("data"), graph));
  const auto base = sampler_from(c, graph.num_metrics());
  const int threads = static_cast<int>(c.integer("threads"));
  const fs::path dir = c.text("out");
  fs::create_directories(dir);

  std::map<std::string, int> labels;
  if (c.has("labels")) {
    for (const auto& [p, l] : read_labels(c.text("labels"))) labels[p] = l;
  }

  std::vector<PatientMetrics> per(cohort.size());
  parallel_for(static_cast<int>(cohort.size()), threads, [&](int i) {
    const auto& p = cohort[i];
    if (p.series.num_visits() < 3) {
      per[i].skipped_reason = "fewer than 3 visits";
      return;
    }
    SamplerConfig cfg = base;
    cfg.seed = patient_seed(c, p.patient);
    const auto t0 = std::chrono::steady_clock::now();
    per[i].record = compute_metrics(p.patient, p.series, graph, cfg);
    log("diagnose " + p.patient + ": " + seconds_text(seconds_since(t0)));
  });

  std::vector<MetricRecord> records;
  int skipped = 0;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    if (!per[i].record) {
      log("warning: patient " + cohort[i].patient + " skipped (" + per[i].skipped_reason + ")");
      ++skipped;
      continue;
    }
    auto r = *per[i].record;
    if (const auto it = labels.find(r.patient); it != labels.end()) r.label = it->second;
    records.push_back(r);
  }
  std::vector<std::string> outputs = {"metrics.csv"};
  write_metrics(records, (dir / "metrics.csv").string());
  if (skipped) log(std::to_string(skipped) + " patient(s) skipped");

  if (c.has("labels")) {
    std::vector<MetricRecord> labeled;
    for (const auto& r : records) {
      if (r.label) {
        labeled.push_back(r);
      } else {
        log("warning: patient " + r.patient + " has no label and is left out of the regressions");
      }
    }
    const auto n_pos = std::count_if(labeled.begin(), labeled.end(), [](const auto& r) { return *r.label == 1; });
    if (n_pos == 0 || n_pos == static_cast<long>(labeled.size())) {
      log("warning: labels contain a single class; regression and ROC outputs skipped");
    } else {
      write_univariate(univariate_table(labeled), (dir / "table2.csv").string());
      const auto cmp = comparison_table(labeled, static_cast<int>(c.integer("bootstrap")),
                                        derive_seed(master_seed(c), 2), c.number("min_spec"));
      write_comparison(cmp.rows, (dir / "table3.csv").string());
      outputs.insert(outputs.end(), {"table2.csv", "table3.csv"});
      for (std::size_t m = 0; m < cmp.models.size(); ++m) {
        const std::string file = "roc_" + cmp.models[m].spec.name + ".csv";
        write_roc(cmp.roc[m], (dir / file).string());
        outputs.push_back(file);
      }
      if (c.flag("followup")) {
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < cohort.size(); ++i) index[cohort[i].patient] = i;
        std::vector<double> cuts;
        const double step = c.number("followup_step");
        if (!(step > 0)) throw std::invalid_argument("--followup-step must be positive");
        for (double d = step; d <= c.number("followup_max") + 1e-9; d += step) cuts.push_back(d);

        // Fit every (patient, truncation) pair up front so threads can share the work.
        std::vector<std::pair<std::size_t, std::size_t>> jobs;
        for (std::size_t p = 0; p < labeled.size(); ++p) {
          for (std::size_t k = 0; k < cuts.size(); ++k) jobs.emplace_back(p, k);
        }
        std::vector<std::optional<MetricRecord>> truncated(jobs.size());
        parallel_for(static_cast<int>(jobs.size()), threads, [&](int j) {
          const auto [p, k] = jobs[j];
          const auto& patient = cohort[index.at(labeled[p].patient)];
          const auto series = patient.series.truncated(cuts[k]);
          if (series.num_visits() < 3) return;
          SamplerConfig cfg = base;
          cfg.seed = patient_seed(c, patient.patient);
          truncated[j] = compute_metrics(patient.patient, series, graph, cfg);
        });
        const auto follow = early_followup(
            cmp, labeled, cuts,
            [&](std::size_t p, double day) {
              const auto k = static_cast<std::size_t>(std::find(cuts.begin(), cuts.end(), day) - cuts.begin());
              return truncated[p * cuts.size() + k];
            },
            static_cast<int>(c.integer("window")), c.number("min_spec"));
        write_followup(follow, (dir / "followup_pauc.csv").string(), (dir / "followup_probabilities.csv").string());
        outputs.insert(outputs.end(), {"followup_pauc.csv", "followup_probabilities.csv"});
      }
    }
  }
  write_manifest(dir.string(), "diagnose", c, outputs);
  return 0;
}

int cmd_simulate(RunConfig& c) {
  const auto graph = graph_from(c);
  const fs::path dir = c.text("out");
  fs::create_directories(dir);
  ModelScales scales;
  scales.y_scale = c.number("y_scale");
  scales.dm_scale = c.number("dm_scale");
  scales.time_scale = c.number("time_scale");
  scales.rho = c.number("rho");

  if (c.flag("cohort")) {
    CohortConfig cc;
    cc.n_patients = static_cast<int>(c.integer("cohort_patients"));
    cc.progressing_fraction = c.number("progressing_fraction");
    cc.n_visits = static_cast<int>(c.integer("visits"));
    Rng rng(derive_seed(master_seed(c), 3));
    const auto cohort = generate_labeled_cohort(cc, graph, scales, rng);
    write_series(cohort.patients, graph, (dir / "series.csv").string());
    write_labels(cohort, (dir / "labels.csv").string());
    write_manifest(dir.string(), "simulate", c, {"series.csv", "labels.csv"});
    log("simulate: cohort of " + std::to_string(cc.n_patients) + " patients");
    return 0;
  }

  // The study's own defaults apply unless iterations were set explicitly.
  RunConfig resolved = c;
  if (!c.provided("n_iter")) resolved.assign("n_iter", 5000);
  if (!c.provided("n_burn")) resolved.assign("n_burn", resolved.integer("n_iter") / 2);
  if (c.flag("full_budget")) {
    resolved.assign("n_theta", 100);
    resolved.assign("n_data", 10);
  }
  StudyBudget budget;
  budget.sampler = sampler_from(resolved, graph.num_metrics());
  budget.threads = static_cast<int>(c.integer("threads"));

  std::vector<SimSetting> settings;
  const std::string list = c.text("settings");
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i] == ',' || list[i] == ' ') continue;
    settings.push_back(make_setting(list[i], static_cast<int>(c.integer("visits")),
                                    static_cast<int>(resolved.integer("n_theta")),
                                    static_cast<int>(resolved.integer("n_data"))));
  }
  if (settings.empty()) throw std::invalid_argument("--settings names no simulation setting");
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = run_study(settings, graph, budget, master_seed(c), scales);
  write_study(result.rows, (dir / "study.csv").string());

  std::ofstream reps(dir / "replicates.csv");
  reps << "setting,theta,dataset,model,ok,truth,mean,lower,upper\n";
  for (const auto& r : result.replicates) {
    for (const auto& [name, res] : {std::pair{"st", &r.st}, std::pair{"space", &r.space}}) {
      reps << r.setting << ',' << r.theta_index + 1 << ',' << r.data_index + 1 << ',' << name << ',' << res->ok << ','
           << format_double(res->truth) << ',';
      if (res->ok) {
        reps << format_double(res->estimate.mean) << ',' << format_double(res->estimate.lower) << ','
             << format_double(res->estimate.upper) << '\n';
      } else {
        reps << "NA,NA,NA\n";
      }
    }
  }
  for (const auto& row : result.rows) {
    if (row.n_fail) log(std::string("warning: setting ") + row.setting + " " + row.model + ": " +
                        std::to_string(row.n_fail) + " failed fit(s) excluded");
  }
  write_manifest(dir.string(), "simulate", resolved, {"study.csv", "replicates.csv"});
  log("simulate: " + std::to_string(result.replicates.size()) + " replicates, " + seconds_text(seconds_since(t0)));
  return 0;
}

}  // namespace womble::cli
