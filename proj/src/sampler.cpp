#include "womble/sampler.hpp"

#include "womble/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace womble {

namespace {

constexpr double kLogFloor = -1e300;

double floored(double v) { return v < kLogFloor ? -std::numeric_limits<double>::infinity() : v; }

Eigen::MatrixXd spd_inverse(const Eigen::Ref<const Eigen::MatrixXd>& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

}  // namespace

Likelihood parse_likelihood(const std::string& name) {
  if (name == "tobit") return Likelihood::tobit;
  if (name == "gaussian") return Likelihood::gaussian;
  throw std::invalid_argument("unknown likelihood '" + name + "'");
}

HyperConfig HyperConfig::defaults(Index num_metrics, double upsilon) {
  const Index p = num_metrics + 2;
  HyperConfig h;
  h.mu_delta = Eigen::VectorXd::Zero(p);
  h.mu_delta(0) = 3.0;
  Eigen::VectorXd omega = Eigen::VectorXd::Constant(p, upsilon);
  omega(0) = omega(1) = 1000.0;
  h.omega_delta = omega.asDiagonal();
  h.xi = static_cast<double>(p) + 1.0;
  h.psi = Eigen::MatrixXd::Identity(p, p);
  return h;
}

void SamplerConfig::validate(Index num_metrics) const {
  if (!(n_iter > n_burn && n_burn >= 0)) throw std::invalid_argument("need n_iter > n_burn >= 0");
  if (n_thin < 1) throw std::invalid_argument("n_thin must be >= 1");
  if (!(proposals.target_acceptance > 0 && proposals.target_acceptance < 1)) {
    throw std::invalid_argument("target acceptance must lie in (0, 1)");
  }
  if (proposals.batch < 1) throw std::invalid_argument("adaptation batch must be >= 1");
  if (!(rho >= 0 && rho < 1)) throw std::invalid_argument("rho must lie in [0, 1)");
  if (!(y_scale > 0 && dm_scale > 0 && time_scale > 0)) throw std::invalid_argument("scales must be positive");
  const Index p = num_metrics + 2;
  if (hyper.mu_delta.size() != 0) {
    if (hyper.mu_delta.size() != p || hyper.omega_delta.rows() != p || hyper.omega_delta.cols() != p ||
        hyper.psi.rows() != p || hyper.psi.cols() != p) {
      throw std::invalid_argument("hyperparameter dimensions must equal q + 2 = " + std::to_string(p));
    }
    if (!(hyper.xi > static_cast<double>(p) - 1)) throw std::invalid_argument("xi must exceed q + 1");
  }
}

Eigen::MatrixXd PosteriorDraws::alpha(Index k) const {
  Eigen::MatrixXd out(size(), theta.empty() ? 0 : theta.front().cols());
  for (Index d = 0; d < size(); ++d) out.row(d) = theta[d].row(2 + k).array().exp();
  return out;
}

GaussianConditional delta_full_conditional(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                           const Eigen::Ref<const Eigen::MatrixXd>& T,
                                           const Eigen::Ref<const Eigen::MatrixXd>& sigma,
                                           const Eigen::Ref<const Eigen::VectorXd>& mu_delta,
                                           const Eigen::Ref<const Eigen::MatrixXd>& omega_delta) {
  Eigen::LLT<Eigen::MatrixXd> ls(sigma);
  if (ls.info() != Eigen::Success) throw NumericalError("Sigma(phi) is not positive definite");
  const Eigen::VectorXd s1 = ls.solve(Eigen::VectorXd::Ones(theta.cols()));
  const double c = s1.sum();
  const Eigen::MatrixXd t_inv = spd_inverse(T, "T");
  const Eigen::MatrixXd omega_inv = spd_inverse(omega_delta, "Omega_delta");
  const Eigen::MatrixXd precision = omega_inv + c * t_inv;
  const Eigen::VectorXd rhs = omega_inv * mu_delta + t_inv * (theta * s1);
  GaussianConditional out;
  out.cov = spd_inverse(precision, "delta conditional precision");
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.mean = out.cov * rhs;
  return out;
}

InverseWishartParams T_full_conditional(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                        const Eigen::Ref<const Eigen::VectorXd>& delta,
                                        const Eigen::Ref<const Eigen::MatrixXd>& sigma, double xi,
                                        const Eigen::Ref<const Eigen::MatrixXd>& psi) {
  InverseWishartParams out;
  out.df = xi + static_cast<double>(theta.cols());
  out.scale = psi;
  if (theta.cols() == 0) return out;
  Eigen::LLT<Eigen::MatrixXd> ls(sigma);
  if (ls.info() != Eigen::Success) throw NumericalError("Sigma(phi) is not positive definite");
  const Eigen::MatrixXd resid = theta.colwise() - delta;
  const Eigen::MatrixXd b = ls.matrixL().solve(resid.transpose());  // nu x p
  out.scale += b.transpose() * b;
  out.scale = 0.5 * (out.scale + out.scale.transpose());
  return out;
}

GibbsSampler::GibbsSampler(const VfSeries& data, const ArealGraph& graph, SamplerConfig config,
                           ColumnPrior prior)
    : config_(std::move(config)), prior_(prior), graph_(graph.scaled(config_.dm_scale)) {
  data.validate();
  if (data.num_locations() != graph.size()) {
    throw std::invalid_argument("series has " + std::to_string(data.num_locations()) +
                                " locations but the graph has " + std::to_string(graph.size()));
  }
  if (config_.hyper.mu_delta.size() == 0) config_.hyper = HyperConfig::defaults(graph.num_metrics());
  config_.validate(graph.num_metrics());
  y_ = data.y / config_.y_scale;
  days_ = data.days / config_.time_scale;
  if (prior_ == ColumnPrior::separable) {
    bounds_ = config_.hyper.phi_bounds ? *config_.hyper.phi_bounds : phi_bounds(days_, config_.correlation);
    if (!(bounds_.lower < bounds_.upper)) throw std::invalid_argument("phi bounds must satisfy lower < upper");
  }
  omega_llt_.compute(config_.hyper.omega_delta);
  if (omega_llt_.info() != Eigen::Success) throw std::invalid_argument("Omega_delta is not positive definite");

  const Index nu = num_visits();
  const auto make = [&](double sd) {
    Adaptive a;
    a.log_sd = std::log(sd);
    return std::vector<Adaptive>(nu, a);
  };
  adapt_mu_ = make(config_.proposals.mu_sd);
  adapt_tau_ = make(config_.proposals.log_tau_sd);
  adapt_alpha_ = make(config_.proposals.log_alpha_sd);
  adapt_block_ = make(std::min({config_.proposals.mu_sd, config_.proposals.log_tau_sd,
                                config_.proposals.log_alpha_sd}));
  adapt_phi_.log_sd = std::log(config_.proposals.phi_sd);
  initialize();
}

void GibbsSampler::initialize() {
  const Index n = y_.rows();
  const Index nu = num_visits();
  const Index p = num_params();
  ChainState s;
  s.theta = Eigen::MatrixXd::Zero(p, nu);
  s.latent = y_;
  for (Index t = 0; t < nu; ++t) {
    double sum = 0;
    int count = 0;
    for (Index i = 0; i < n; ++i) {
      if (y_(i, t) != 0.0) {
        sum += y_(i, t);
        ++count;
      } else if (config_.likelihood == Likelihood::tobit) {
        s.latent(i, t) = -0.1;
      }
    }
    s.theta(0, t) = count ? sum / count : 0.0;
    const double mean = y_.col(t).mean();
    const double sd = n > 1 ? std::sqrt((y_.col(t).array() - mean).square().sum() / (n - 1)) : 0.0;
    s.theta(1, t) = sd > 0 ? std::log(sd) : 0.0;
  }
  s.delta = s.theta.rowwise().mean();
  s.T = Eigen::MatrixXd::Identity(p, p);
  s.phi = prior_ == ColumnPrior::separable ? 0.5 * (bounds_.lower + bounds_.upper) : 0.0;
  s.obs_var = 1.0;
  set_state(std::move(s));
}

void GibbsSampler::set_state(ChainState state) {
  const Index p = num_params();
  if (state.theta.rows() != p || state.theta.cols() != num_visits() || state.latent.rows() != y_.rows() ||
      state.latent.cols() != num_visits()) {
    throw std::invalid_argument("chain state has the wrong shape");
  }
  state_ = std::move(state);
  weights_.assign(num_visits(), Eigen::VectorXd());
  factors_.assign(num_visits(), CarFactor<double>());
  for (Index t = 0; t < num_visits(); ++t) refresh_column_factor(t);
  t_llt_.compute(state_.T);
  if (t_llt_.info() != Eigen::Success) throw NumericalError("T is not positive definite");
  refresh_temporal();
}

void GibbsSampler::set_observations(const Eigen::Ref<const Eigen::MatrixXd>& y_model) {
  if (y_model.rows() != y_.rows() || y_model.cols() != y_.cols()) {
    throw std::invalid_argument("observation matrix has the wrong shape");
  }
  y_ = y_model;
  if (config_.likelihood == Likelihood::tobit) {
    for (Index t = 0; t < y_.cols(); ++t) {
      for (Index i = 0; i < y_.rows(); ++i) {
        if (y_(i, t) != 0.0) {
          state_.latent(i, t) = y_(i, t);
        } else if (state_.latent(i, t) > 0.0) {
          state_.latent(i, t) = -0.1;
        }
      }
    }
  }
}

void GibbsSampler::refresh_temporal() {
  if (prior_ != ColumnPrior::separable) return;
  conditionals_ = column_conditionals(temporal_correlation(days_, state_.phi, config_.correlation));
}

void GibbsSampler::refresh_column_factor(Index t) {
  const Eigen::VectorXd alpha = state_.theta.col(t).tail(graph_.num_metrics()).array().exp();
  weights_[t] = edge_weights(graph_, alpha, config_.weights);
  factors_[t] = CarFactor<double>(precision_from_weights(graph_, weights_[t], config_.rho));
  if (!factors_[t].ok()) throw NumericalError("CAR precision is not positive definite\n" + dump_state());
}

double GibbsSampler::column_prior_logdensity(Index t, const Eigen::Ref<const Eigen::VectorXd>& column) const {
  if (prior_ == ColumnPrior::independent) {
    const Eigen::VectorXd r = column - config_.hyper.mu_delta;
    return -0.5 * omega_llt_.matrixL().solve(r).squaredNorm();
  }
  const auto& c = conditionals_[t];
  Eigen::VectorXd mean = state_.delta;
  for (Index s = 0; s < num_visits(); ++s) {
    if (c.coef(s) != 0.0) mean += c.coef(s) * (state_.theta.col(s) - state_.delta);
  }
  const Eigen::VectorXd r = column - mean;
  return -0.5 * t_llt_.matrixL().solve(r).squaredNorm() / c.scale;
}

double GibbsSampler::column_log_target(Index t, const Eigen::Ref<const Eigen::VectorXd>& column) const {
  const Index q = graph_.num_metrics();
  const bool same_alpha = column.tail(q) == state_.theta.col(t).tail(q);
  CarFactor<double> fresh;
  if (!same_alpha) {
    const Eigen::VectorXd alpha = column.tail(q).array().exp();
    if (!alpha.allFinite()) return -std::numeric_limits<double>::infinity();
    fresh = CarFactor<double>(precision_matrix(graph_, alpha, config_.rho, config_.weights));
    if (!fresh.ok()) return -std::numeric_limits<double>::infinity();
  }
  const auto& factor = same_alpha ? factors_[t] : fresh;
  return floored(car_logdensity(state_.latent.col(t), column(0), column(1), factor) +
                 column_prior_logdensity(t, column));
}

void GibbsSampler::adapt(Adaptive& a, bool accepted) {
  ++a.stats.proposed;
  if (accepted) ++a.stats.accepted;
  if (!adapting_) return;
  ++a.batch_tried;
  if (accepted) ++a.batch_accepted;
  if (a.batch_tried >= config_.proposals.batch) {
    ++a.batches;
    const double rate = static_cast<double>(a.batch_accepted) / a.batch_tried;
    const double step = std::min(0.5, 1.0 / std::sqrt(static_cast<double>(a.batches)));
    a.log_sd += rate > config_.proposals.target_acceptance ? step : -step;
    a.batch_tried = a.batch_accepted = 0;
  }
}

void GibbsSampler::metropolis_column(Index t, const std::vector<Index>& components, Adaptive& adapt_state,
                                     Rng& rng) {
  const Index q = graph_.num_metrics();
  const double sd = std::exp(adapt_state.log_sd);
  const Eigen::VectorXd current = state_.theta.col(t);
  Eigen::VectorXd proposal = current;
  bool alpha_changed = false;
  for (const Index k : components) {
    proposal(k) += sd * std_normal(rng);
    if (k >= 2) alpha_changed = true;
  }

  Eigen::VectorXd new_weights;
  CarFactor<double> new_factor;
  if (alpha_changed) {
    const Eigen::VectorXd alpha = proposal.tail(q).array().exp();
    bool usable = alpha.allFinite();
    if (usable) {
      new_weights = edge_weights(graph_, alpha, config_.weights);
      usable = new_weights.allFinite();
    }
    if (usable) {
      new_factor = CarFactor<double>(precision_from_weights(graph_, new_weights, config_.rho));
      usable = new_factor.ok();
    }
    if (!usable) {
      ++adapt_state.stats.rejected_numerical;
      adapt(adapt_state, false);
      return;
    }
  }

  const auto latent = state_.latent.col(t);
  const double cur = floored(car_logdensity(latent, current(0), current(1), factors_[t]) +
                             column_prior_logdensity(t, current));
  if (!std::isfinite(cur)) {
    throw NumericalError("non-finite log target at visit " + std::to_string(t + 1) + "\n" + dump_state());
  }
  const auto& factor = alpha_changed ? new_factor : factors_[t];
  const double prop =
      floored(car_logdensity(latent, proposal(0), proposal(1), factor) + column_prior_logdensity(t, proposal));

  const bool accept = std::isfinite(prop) && std::log(uniform01(rng)) < prop - cur;
  if (accept) {
    state_.theta.col(t) = proposal;
    if (alpha_changed) {
      weights_[t] = std::move(new_weights);
      factors_[t] = std::move(new_factor);
    }
  }
  adapt(adapt_state, accept);
}

void GibbsSampler::update_latent(Index t, Rng& rng) {
  const double mu = state_.theta(0, t);
  const double tau = std::exp(state_.theta(1, t));
  auto latent = state_.latent.col(t);
  for (Index i = 0; i < y_.rows(); ++i) {
    const bool tobit = config_.likelihood == Likelihood::tobit;
    if (tobit && y_(i, t) != 0.0) continue;
    const auto cond = car_conditional(i, latent, mu, tau, graph_, weights_[t], config_.rho);
    if (tobit) {
      latent(i) = truncated_normal_upper(cond.mean, std::sqrt(cond.variance), 0.0, rng);
    } else {
      const double precision = 1.0 / cond.variance + 1.0 / state_.obs_var;
      const double mean = (cond.mean / cond.variance + y_(i, t) / state_.obs_var) / precision;
      latent(i) = mean + std_normal(rng) / std::sqrt(precision);
    }
  }
}

void GibbsSampler::update_obs_params(Index t, Rng& rng) {
  const Index p = num_params();
  if (config_.block_theta) {
    std::vector<Index> all(p);
    for (Index k = 0; k < p; ++k) all[k] = k;
    metropolis_column(t, all, adapt_block_[t], rng);
    return;
  }
  metropolis_column(t, {0}, adapt_mu_[t], rng);
  metropolis_column(t, {1}, adapt_tau_[t], rng);
  if (p > 2) {
    std::vector<Index> alpha(p - 2);
    for (Index k = 2; k < p; ++k) alpha[k - 2] = k;
    metropolis_column(t, alpha, adapt_alpha_[t], rng);
  }
}

void GibbsSampler::update_delta(Rng& rng) {
  const auto sigma = temporal_correlation(days_, state_.phi, config_.correlation);
  const auto cond = delta_full_conditional(state_.theta, state_.T, sigma, config_.hyper.mu_delta,
                                           config_.hyper.omega_delta);
  state_.delta = mvn_from_covariance(cond.mean, cond.cov, rng);
}

void GibbsSampler::update_T(Rng& rng) {
  const auto sigma = temporal_correlation(days_, state_.phi, config_.correlation);
  const auto iw = T_full_conditional(state_.theta, state_.delta, sigma, config_.hyper.xi, config_.hyper.psi);
  state_.T = inverse_wishart(iw.df, iw.scale, rng);
  t_llt_.compute(state_.T);
  if (t_llt_.info() != Eigen::Success) throw NumericalError("T draw is not positive definite\n" + dump_state());
}

void GibbsSampler::update_phi(Rng& rng) {
  const double lo = bounds_.lower;
  const double hi = bounds_.upper;
  const auto log_target = [&](double phi) {
    const auto sigma = temporal_correlation(days_, phi, config_.correlation);
    // Jacobian of phi = lo + (hi - lo) / (1 + exp(-eta)).
    return matrix_normal_logdensity(state_.theta, state_.delta, state_.T, sigma) + std::log(phi - lo) +
           std::log(hi - phi);
  };
  const double cur_phi = state_.phi;
  const double eta = std::log((cur_phi - lo) / (hi - cur_phi));
  const double eta_new = eta + std::exp(adapt_phi_.log_sd) * std_normal(rng);
  const double new_phi = lo + (hi - lo) / (1.0 + std::exp(-eta_new));
  bool accept = false;
  if (new_phi > lo && new_phi < hi) {
    const double cur = log_target(cur_phi);
    if (!std::isfinite(cur)) throw NumericalError("non-finite phi target\n" + dump_state());
    const double prop = floored(log_target(new_phi));
    accept = std::isfinite(prop) && std::log(uniform01(rng)) < prop - cur;
  }
  if (accept) {
    state_.phi = new_phi;
    refresh_temporal();
  }
  adapt(adapt_phi_, accept);
}

void GibbsSampler::update_obs_var(Rng& rng) {
  const double shape = config_.hyper.obs_var_shape + 0.5 * static_cast<double>(y_.size());
  const double rate = config_.hyper.obs_var_rate + 0.5 * (y_ - state_.latent).squaredNorm();
  state_.obs_var = 1.0 / std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

void GibbsSampler::sweep(Rng& rng) {
  for (Index t = 0; t < num_visits(); ++t) update_latent(t, rng);
  if (config_.likelihood == Likelihood::tobit && !latent_feasible()) {
    throw NumericalError("latent field violates the Tobit constraint\n" + dump_state());
  }
  for (Index t = 0; t < num_visits(); ++t) update_obs_params(t, rng);
  if (config_.likelihood == Likelihood::gaussian) update_obs_var(rng);
  if (prior_ == ColumnPrior::separable) {
    update_delta(rng);
    update_T(rng);
    update_phi(rng);
  }
}

bool GibbsSampler::latent_feasible() const {
  if (config_.likelihood != Likelihood::tobit) return true;
  for (Index t = 0; t < y_.cols(); ++t) {
    if (std::isinf(tobit_loglik(y_.col(t), state_.latent.col(t)))) return false;
  }
  return true;
}

void GibbsSampler::reset_acceptance() {
  for (auto* v : {&adapt_mu_, &adapt_tau_, &adapt_alpha_, &adapt_block_}) {
    for (auto& a : *v) a.stats = {};
  }
  adapt_phi_.stats = {};
}

std::map<std::string, AcceptanceStats> GibbsSampler::acceptance() const {
  std::map<std::string, AcceptanceStats> out;
  const auto add = [&](const std::string& name, const std::vector<Adaptive>& v) {
    AcceptanceStats total;
    for (const auto& a : v) {
      total.accepted += a.stats.accepted;
      total.proposed += a.stats.proposed;
      total.rejected_numerical += a.stats.rejected_numerical;
    }
    if (total.proposed) out[name] = total;
  };
  add("mu", adapt_mu_);
  add("log_tau", adapt_tau_);
  add("log_alpha", adapt_alpha_);
  add("theta", adapt_block_);
  if (adapt_phi_.stats.proposed) out["phi"] = adapt_phi_.stats;
  return out;
}

std::string GibbsSampler::dump_state() const {
  std::ostringstream out;
  const Eigen::IOFormat fmt(Eigen::StreamPrecision, 0, ", ", "\n", "  [", "]");
  out << "theta =\n" << state_.theta.format(fmt) << "\ndelta = " << state_.delta.transpose().format(fmt)
      << "\nT =\n" << state_.T.format(fmt) << "\nphi = " << state_.phi << '\n';
  return out.str();
}

namespace {

PosteriorDraws collect(GibbsSampler& sampler, const SamplerConfig& config, Rng& rng) {
  PosteriorDraws draws;
  for (int iter = 0; iter < config.n_iter; ++iter) {
    sampler.sweep(rng);
    if (iter + 1 == config.n_burn) {
      sampler.freeze_adaptation();
      sampler.reset_acceptance();
    }
    if (iter < config.n_burn || (iter - config.n_burn) % config.n_thin != 0) continue;
    const auto& s = sampler.state();
    Eigen::LLT<Eigen::MatrixXd> llt(s.T);
    if (llt.info() != Eigen::Success) throw NumericalError("retained T is not positive definite");
    if (!sampler.latent_feasible()) throw NumericalError("retained latent field is not Tobit-feasible");
    draws.iterations.push_back(iter + 1);
    draws.theta.push_back(s.theta);
    draws.delta.push_back(s.delta);
    draws.T.push_back(s.T);
    draws.phi.push_back(s.phi);
    if (config.keep_latent) draws.latent.push_back(s.latent);
    if (config.likelihood == Likelihood::gaussian) draws.obs_var.push_back(s.obs_var);
  }
  draws.acceptance = sampler.acceptance();
  draws.bounds = sampler.bounds();
  draws.num_metrics = sampler.model_graph().num_metrics();
  draws.y_scale = config.y_scale;
  draws.dm_scale = config.dm_scale;
  draws.time_scale = config.time_scale;
  return draws;
}

}  // namespace

PosteriorDraws run_chain(const VfSeries& data, const ArealGraph& graph, const SamplerConfig& config) {
  GibbsSampler sampler(data, graph, config, ColumnPrior::separable);
  if (config.n_burn == 0) sampler.freeze_adaptation();
  Rng rng(derive_seed(config.seed, 0));
  auto draws = collect(sampler, sampler.config(), rng);
  draws.days = data.days;
  for (double phi : draws.phi) {
    if (phi < draws.bounds.lower || phi > draws.bounds.upper) throw NumericalError("phi left its support");
  }
  return draws;
}

std::vector<PosteriorDraws> fit_space_only(const VfSeries& data, const ArealGraph& graph,
                                           const SamplerConfig& config) {
  data.validate();
  SamplerConfig per_visit = config;
  per_visit.weights = WeightForm::threshold;
  std::vector<PosteriorDraws> out;
  for (Index t = 0; t < data.num_visits(); ++t) {
    VfSeries single{data.y.col(t), Eigen::VectorXd::Zero(1)};
    GibbsSampler sampler(single, graph, per_visit, ColumnPrior::independent);
    if (per_visit.n_burn == 0) sampler.freeze_adaptation();
    Rng rng(derive_seed(config.seed, 1, static_cast<std::uint64_t>(t) + 1));
    auto draws = collect(sampler, sampler.config(), rng);
    draws.days = data.days.segment(t, 1);
    out.push_back(std::move(draws));
  }
  return out;
}

void write_draws(const PosteriorDraws& draws, const ArealGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iter,param,visit,component,value\n";
  const auto row = [&](int iter, const char* param, Index visit, Index comp, double v) {
    out << iter << ',' << param << ',' << visit << ',' << comp << ',' << format_double(v) << '\n';
  };
  for (Index d = 0; d < draws.size(); ++d) {
    const int it = draws.iterations[d];
    const auto& th = draws.theta[d];
    for (Index t = 0; t < th.cols(); ++t) {
      row(it, "mu", t + 1, 0, th(0, t));
      row(it, "log_tau", t + 1, 0, th(1, t));
      for (Index k = 2; k < th.rows(); ++k) row(it, "log_alpha", t + 1, k - 2, th(k, t));
    }
    for (Index k = 0; k < draws.delta[d].size(); ++k) row(it, "delta", 0, k, draws.delta[d](k));
    const auto& T = draws.T[d];
    for (Index r = 0; r < T.rows(); ++r) {
      for (Index c = 0; c < T.cols(); ++c) row(it, "T", 0, r * T.cols() + c, T(r, c));
    }
    row(it, "phi", 0, 0, draws.phi[d]);
    if (!draws.obs_var.empty()) row(it, "obs_var", 0, 0, draws.obs_var[d]);
    if (!draws.latent.empty()) {
      const auto& lat = draws.latent[d];
      for (Index t = 0; t < lat.cols(); ++t) {
        for (Index i = 0; i < lat.rows(); ++i) row(it, "latent", t + 1, graph.locations()[i].id, lat(i, t));
      }
    }
  }
}

PosteriorDraws read_draws(const std::string& path, const ArealGraph& graph) {
  const auto table = CsvTable::read(path);
  const int c_iter = table.require_column("iter");
  const int c_param = table.require_column("param");
  const int c_visit = table.require_column("visit");
  const int c_comp = table.require_column("component");
  const int c_value = table.require_column("value");

  struct Raw {
    std::map<std::tuple<std::string, long, long>, double> values;
  };
  std::vector<int> order;
  std::map<int, Raw> by_iter;
  long nu = 0, q = 0, p_delta = 0;
  for (const auto& r : table.rows()) {
    const int it = static_cast<int>(table.integer(r, c_iter));
    const std::string& param = r.fields[c_param];
    const long visit = table.integer(r, c_visit);
    const long comp = table.integer(r, c_comp);
    if (!by_iter.count(it)) order.push_back(it);
    by_iter[it].values[{param, visit, comp}] = table.number(r, c_value);
    if (param == "mu") nu = std::max(nu, visit);
    if (param == "log_alpha") q = std::max(q, comp + 1);
    if (param == "delta") p_delta = std::max(p_delta, comp + 1);
  }
  const long p = q + 2;
  if (p_delta != p) throw ParseError(path, 0, "delta length does not match q + 2");
  PosteriorDraws draws;
  draws.num_metrics = q;
  for (const int it : order) {
    const auto& v = by_iter[it].values;
    const auto get = [&](const std::string& param, long visit, long comp) {
      const auto f = v.find({param, visit, comp});
      if (f == v.end()) {
        throw ParseError(path, 0, "iteration " + std::to_string(it) + " lacks " + param + "[" +
                                      std::to_string(visit) + "," + std::to_string(comp) + "]");
      }
      return f->second;
    };
    Eigen::MatrixXd th(p, nu);
    for (long t = 0; t < nu; ++t) {
      th(0, t) = get("mu", t + 1, 0);
      th(1, t) = get("log_tau", t + 1, 0);
      for (long k = 0; k < q; ++k) th(2 + k, t) = get("log_alpha", t + 1, k);
    }
    Eigen::VectorXd delta(p);
    for (long k = 0; k < p; ++k) delta(k) = get("delta", 0, k);
    Eigen::MatrixXd T(p, p);
    for (long r = 0; r < p; ++r) {
      for (long c = 0; c < p; ++c) T(r, c) = get("T", 0, r * p + c);
    }
    draws.iterations.push_back(it);
    draws.theta.push_back(th);
    draws.delta.push_back(delta);
    draws.T.push_back(T);
    draws.phi.push_back(get("phi", 0, 0));
    if (v.count({"obs_var", 0, 0})) draws.obs_var.push_back(get("obs_var", 0, 0));
    if (v.count({"latent", 1, graph.locations().front().id})) {
      Eigen::MatrixXd lat(graph.size(), nu);
      for (long t = 0; t < nu; ++t) {
        for (Index i = 0; i < graph.size(); ++i) lat(i, t) = get("latent", t + 1, graph.locations()[i].id);
      }
      draws.latent.push_back(lat);
    }
  }
  return draws;
}

}  // namespace womble
