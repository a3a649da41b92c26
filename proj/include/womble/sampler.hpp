#pragma once

// Metropolis-within-Gibbs for the spatiotemporal boundary model.
//
// One systematic scan updates, in order:
//   1. censored latent sites of every visit (truncated CAR conditionals),
//   2. each visit's parameter column (mu, log tau, log alpha) by adaptive
//      random-walk Metropolis against CAR density x column-conditional prior,
//   3. delta (conjugate normal),
//   4. T (conjugate inverse-Wishart),
//   5. phi (random walk on the logit scale of its uniform support).
// All state is in model units: observations divided by y_scale,
// dissimilarities divided by dm_scale and visit days divided by time_scale.

#include "womble/car.hpp"
#include "womble/random.hpp"
#include "womble/series.hpp"
#include "womble/temporal.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace womble {

enum class Likelihood { tobit, gaussian };

Likelihood parse_likelihood(const std::string& name);

/// Prior on the parameter columns: the separable temporal process, or
/// independent N(mu_delta, Omega_delta) columns with no hyper-level updates
/// (the spatial-only comparator).
enum class ColumnPrior { separable, independent };

struct HyperConfig {
  Eigen::VectorXd mu_delta;
  Eigen::MatrixXd omega_delta;
  double xi = 0;
  Eigen::MatrixXd psi;
  std::optional<PhiBounds> phi_bounds;  // derived from the visit days when empty
  double obs_var_shape = 1.0;           // gaussian likelihood only
  double obs_var_rate = 1.0;

  /// mu_delta = (3, 0, 0...), Omega_delta = Diag(1000, 1000, upsilon...),
  /// xi = q + 3, Psi = I.
  static HyperConfig defaults(Index num_metrics, double upsilon = 1.0);
};

struct ProposalConfig {
  double mu_sd = 0.1;
  double log_tau_sd = 0.1;
  double log_alpha_sd = 0.3;
  double phi_sd = 0.5;  // on the logit scale
  double target_acceptance = 0.44;
  int batch = 50;
};

struct SamplerConfig {
  int n_iter = 10000;
  int n_burn = 2000;
  int n_thin = 5;
  std::uint64_t seed = 1;
  ProposalConfig proposals;
  double rho = 0.99;
  CorrelationFamily correlation = CorrelationFamily::exponential;
  Likelihood likelihood = Likelihood::tobit;
  WeightForm weights = WeightForm::continuous;
  HyperConfig hyper;
  double y_scale = 10.0;
  double dm_scale = 100.0;
  double time_scale = 365.0;  // visit days are divided by this (days -> years)
  bool block_theta = false;  // one joint proposal per column instead of three
  bool keep_latent = false;

  void validate(Index num_metrics) const;
};

struct ChainState {
  Eigen::MatrixXd theta;   // (q + 2) x nu
  Eigen::VectorXd delta;   // q + 2
  Eigen::MatrixXd T;       // (q + 2) x (q + 2)
  double phi = 0;
  Eigen::MatrixXd latent;  // n x nu
  double obs_var = 1;      // gaussian likelihood only
};

struct AcceptanceStats {
  long accepted = 0;
  long proposed = 0;
  long rejected_numerical = 0;  // proposals with a non-factorizable Q
  double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
};

/// Retained draws plus the metadata needed to interpret them.
struct PosteriorDraws {
  std::vector<int> iterations;
  std::vector<Eigen::MatrixXd> theta;
  std::vector<Eigen::VectorXd> delta;
  std::vector<Eigen::MatrixXd> T;
  std::vector<double> phi;
  std::vector<Eigen::MatrixXd> latent;  // empty unless keep_latent
  std::vector<double> obs_var;          // gaussian likelihood only
  std::map<std::string, AcceptanceStats> acceptance;
  Eigen::VectorXd days;  // raw visit days
  PhiBounds bounds;      // model time units
  Index num_metrics = 0;
  double y_scale = 1.0;
  double dm_scale = 1.0;
  double time_scale = 1.0;

  Index size() const { return static_cast<Index>(theta.size()); }
  Index num_visits() const { return days.size(); }
  /// alpha_tk = exp(theta(2 + k, t)); returns draws x nu.
  Eigen::MatrixXd alpha(Index k = 0) const;
};

/// Conjugate conditional of delta: vec(theta) ~ MVN(1 (x) delta, Sigma (x) T)
/// with delta ~ MVN(mu_delta, Omega_delta).
struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

GaussianConditional delta_full_conditional(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                           const Eigen::Ref<const Eigen::MatrixXd>& T,
                                           const Eigen::Ref<const Eigen::MatrixXd>& sigma,
                                           const Eigen::Ref<const Eigen::VectorXd>& mu_delta,
                                           const Eigen::Ref<const Eigen::MatrixXd>& omega_delta);

struct InverseWishartParams {
  double df = 0;
  Eigen::MatrixXd scale;
};

/// IW(xi + nu, Psi + E Sigma^{-1} E') with E = theta - delta 1'.
InverseWishartParams T_full_conditional(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                        const Eigen::Ref<const Eigen::VectorXd>& delta,
                                        const Eigen::Ref<const Eigen::MatrixXd>& sigma, double xi,
                                        const Eigen::Ref<const Eigen::MatrixXd>& psi);

class GibbsSampler {
 public:
  /// `y` in dB and `graph` with raw dissimilarities; scaling happens here.
  GibbsSampler(const VfSeries& data, const ArealGraph& graph, SamplerConfig config,
               ColumnPrior prior = ColumnPrior::separable);

  /// Data-driven deterministic starting state.
  void initialize();

  void sweep(Rng& rng);

  void update_latent(Index t, Rng& rng);
  void update_obs_params(Index t, Rng& rng);
  void update_delta(Rng& rng);
  void update_T(Rng& rng);
  void update_phi(Rng& rng);
  void update_obs_var(Rng& rng);

  const ChainState& state() const { return state_; }
  /// Replaces the state and refreshes every cache derived from it.
  void set_state(ChainState state);
  /// Replaces the observations (model units). Latent entries at observed
  /// sites are reset to the data.
  void set_observations(const Eigen::Ref<const Eigen::MatrixXd>& y_model);

  /// Log target of visit t's column: CAR density of the latent field plus
  /// the column's conditional prior, up to a constant.
  double column_log_target(Index t, const Eigen::Ref<const Eigen::VectorXd>& column) const;

  void freeze_adaptation() { adapting_ = false; }
  void reset_acceptance();
  std::map<std::string, AcceptanceStats> acceptance() const;

  const PhiBounds& bounds() const { return bounds_; }
  const Eigen::MatrixXd& observations() const { return y_; }
  const ArealGraph& model_graph() const { return graph_; }
  const SamplerConfig& config() const { return config_; }
  Index num_params() const { return 2 + graph_.num_metrics(); }
  Index num_visits() const { return days_.size(); }

  /// Tobit feasibility of the whole latent field.
  bool latent_feasible() const;

  std::string dump_state() const;

 private:
  struct Adaptive {
    double log_sd = 0;
    int batch_accepted = 0;
    int batch_tried = 0;
    int batches = 0;
    AcceptanceStats stats;
  };

  void refresh_temporal();
  void refresh_column_factor(Index t);
  void metropolis_column(Index t, const std::vector<Index>& components, Adaptive& adapt, Rng& rng);
  void adapt(Adaptive& a, bool accepted);
  double column_prior_logdensity(Index t, const Eigen::Ref<const Eigen::VectorXd>& column) const;

  SamplerConfig config_;
  ColumnPrior prior_;
  ArealGraph graph_;
  Eigen::MatrixXd y_;
  Eigen::VectorXd days_;
  PhiBounds bounds_;

  ChainState state_;
  std::vector<Eigen::VectorXd> weights_;        // per visit, per edge
  std::vector<CarFactor<double>> factors_;      // per visit
  std::vector<ColumnConditional> conditionals_; // per visit
  Eigen::LLT<Eigen::MatrixXd> t_llt_;
  Eigen::LLT<Eigen::MatrixXd> omega_llt_;

  std::vector<Adaptive> adapt_mu_, adapt_tau_, adapt_alpha_, adapt_block_;
  Adaptive adapt_phi_;
  bool adapting_ = true;
};

/// Full spatiotemporal fit: burn-in with adaptation, then frozen proposals,
/// thinning and invariant checks on every retained draw.
PosteriorDraws run_chain(const VfSeries& data, const ArealGraph& graph, const SamplerConfig& config);

/// Spatial-only comparator: an independent chain per visit with binary
/// threshold weights and independent N(mu_delta, Omega_delta) column priors.
std::vector<PosteriorDraws> fit_space_only(const VfSeries& data, const ArealGraph& graph,
                                           const SamplerConfig& config);

/// Long-format draw table `iter,param,visit,component,value`. Hyper-level
/// parameters use visit 0; T uses component r * p + c; latent fields use the
/// location file id as component.
void write_draws(const PosteriorDraws& draws, const ArealGraph& graph, const std::string& path);
PosteriorDraws read_draws(const std::string& path, const ArealGraph& graph);

}  // namespace womble
