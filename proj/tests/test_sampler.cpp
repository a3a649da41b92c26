#include "support.hpp"

#include "womble/sampler.hpp"
#include "womble/simulation.hpp"
#include "womble/stats.hpp"

#include <doctest.h>

#include <algorithm>

using namespace womble;
using namespace testing;

namespace {

GaussianConditional dense_delta(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& T, const Eigen::MatrixXd& sigma,
                                const Eigen::VectorXd& mu, const Eigen::MatrixXd& omega) {
  const Index p = theta.rows(), nu = theta.cols();
  const Eigen::MatrixXd a = kron(Eigen::MatrixXd::Ones(nu, 1), Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd v_inv = kron(sigma, T).inverse();
  const Eigen::MatrixXd omega_inv = omega.inverse();
  GaussianConditional out;
  out.cov = (omega_inv + a.transpose() * v_inv * a).inverse();
  out.mean = out.cov * (omega_inv * mu + a.transpose() * v_inv * vec(theta));
  return out;
}

Eigen::MatrixXd dense_T_scale(const Eigen::MatrixXd& theta, const Eigen::VectorXd& delta, const Eigen::MatrixXd& sigma,
                              const Eigen::MatrixXd& psi) {
  const Eigen::MatrixXd s_inv = sigma.inverse();
  Eigen::MatrixXd out = psi;
  for (Index s = 0; s < theta.cols(); ++s) {
    for (Index t = 0; t < theta.cols(); ++t) {
      out += s_inv(s, t) * (theta.col(s) - delta) * (theta.col(t) - delta).transpose();
    }
  }
  return out;
}

// Small simulated series on the field layout, in dB.
VfSeries small_series(int nu, std::uint64_t seed) {
  Rng rng(seed);
  const auto setting = make_setting('D', nu);
  ModelScales scales;
  const auto draw = sample_theta(setting, true_hypers(), 1, scales, rng);
  return sample_series(draw.theta, draw.days, vf_graph(), scales, rng);
}

SamplerConfig quick_config(int n_iter, std::uint64_t seed) {
  SamplerConfig c;
  c.n_iter = n_iter;
  c.n_burn = n_iter / 2;
  c.n_thin = 1;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("delta conditional against the dense vec-form oracle") {
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    const Index p = 2 + k % 3, nu = 1 + k % 4;
    const Eigen::MatrixXd theta = random_vector(p * nu, rng).reshaped(p, nu);
    const Eigen::MatrixXd T = random_spd(p, rng);
    const Eigen::MatrixXd sigma = temporal_correlation(random_days(nu, rng), 0.3 + uniform01(rng));
    const Eigen::VectorXd mu = random_vector(p, rng);
    const Eigen::MatrixXd omega = random_spd(p, rng, 0.5, 5);
    const auto got = delta_full_conditional(theta, T, sigma, mu, omega);
    const auto want = dense_delta(theta, T, sigma, mu, omega);
    CHECK((got.mean - want.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((got.cov - want.cov).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("delta conditional limits") {
  Rng rng(13);
  const Eigen::MatrixXd theta = random_vector(3, rng);
  const Eigen::MatrixXd T = random_spd(3, rng);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  const Eigen::VectorXd mu = random_vector(3, rng);
  const auto flat = delta_full_conditional(theta, T, one, mu, 1e12 * Eigen::MatrixXd::Identity(3, 3));
  CHECK((flat.mean - theta.col(0)).cwiseAbs().maxCoeff() < 1e-9);
  const auto tight = delta_full_conditional(theta, T, one, mu, 1e-12 * Eigen::MatrixXd::Identity(3, 3));
  CHECK((tight.mean - mu).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("T conditional against the dense oracle and its limits") {
  Rng rng(14);
  for (int k = 0; k < 20; ++k) {
    const Index p = 2 + k % 3, nu = 1 + k % 4;
    const Eigen::MatrixXd theta = random_vector(p * nu, rng).reshaped(p, nu);
    const Eigen::VectorXd delta = random_vector(p, rng);
    const Eigen::MatrixXd sigma = temporal_correlation(random_days(nu, rng), 0.3 + uniform01(rng));
    const Eigen::MatrixXd psi = random_spd(p, rng);
    const auto iw = T_full_conditional(theta, delta, sigma, 5.0, psi);
    CHECK(iw.df == 5.0 + nu);
    CHECK((iw.scale - dense_T_scale(theta, delta, sigma, psi)).cwiseAbs().maxCoeff() < 1e-8);
  }
  const Eigen::MatrixXd psi = random_spd(3, rng);
  const auto prior = T_full_conditional(Eigen::MatrixXd(3, 0), Eigen::VectorXd::Zero(3), Eigen::MatrixXd(0, 0), 6, psi);
  CHECK(prior.df == 6);
  CHECK(prior.scale == psi);
  const Eigen::MatrixXd theta = random_vector(9, rng).reshaped(3, 3);
  const Eigen::VectorXd delta = random_vector(3, rng);
  const auto id = T_full_conditional(theta, delta, Eigen::MatrixXd::Identity(3, 3), 6, psi);
  const Eigen::MatrixXd e = theta.colwise() - delta;
  CHECK((id.scale - (psi + e * e.transpose())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("update_delta draws from the conjugate conditional") {
  const auto data = small_series(4, 1);
  GibbsSampler s(data, vf_graph(), quick_config(10, 1));
  Rng rng(2);
  for (int k = 0; k < 50; ++k) s.sweep(rng);
  const ChainState frozen = s.state();
  const auto sigma = temporal_correlation((data.days / 365.0).eval(), frozen.phi);
  const auto& h = s.config().hyper;
  const auto want = delta_full_conditional(frozen.theta, frozen.T, sigma, h.mu_delta, h.omega_delta);
  const int n = 20000;
  Eigen::MatrixXd draws(frozen.delta.size(), n);
  for (int k = 0; k < n; ++k) {
    s.update_delta(rng);
    draws.col(k) = s.state().delta;
  }
  const Eigen::VectorXd m = draws.rowwise().mean();
  for (Index j = 0; j < m.size(); ++j) CHECK(std::abs(m(j) - want.mean(j)) < 4 * std::sqrt(want.cov(j, j) / n));
}

TEST_CASE("uncensored data leave the latent field equal to the data") {
  VfSeries data = small_series(3, 2);
  data.y = data.y.array() + 1.0;
  auto cfg = quick_config(40, 3);
  cfg.keep_latent = true;
  const auto draws = run_chain(data, vf_graph(), cfg);
  for (const auto& lat : draws.latent) CHECK((lat - data.y / 10.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("retained latent fields are Tobit-feasible") {
  const auto data = small_series(3, 4);
  REQUIRE((data.y.array() == 0).any());
  auto cfg = quick_config(200, 5);
  cfg.keep_latent = true;
  const auto draws = run_chain(data, vf_graph(), cfg);
  for (const auto& lat : draws.latent) {
    for (Index t = 0; t < lat.cols(); ++t) CHECK(tobit_loglik((data.y.col(t) / 10.0).eval(), lat.col(t).eval()) == 0.0);
  }
}

TEST_CASE("censored single-site latent draws follow the truncated conditional") {
  std::vector<Location> locs;
  for (int i = 0; i < 4; ++i) locs.push_back({i + 1, 0, i, {}, false});
  std::vector<Edge> edges = {{0, 1, Eigen::VectorXd()}, {1, 2, Eigen::VectorXd()}, {1, 3, Eigen::VectorXd()}};
  const ArealGraph g(locs, edges, 0);
  VfSeries data{Eigen::MatrixXd(4, 1), Eigen::VectorXd::Zero(1)};
  data.y << 3.0, 0.0, 1.0, 2.0;
  SamplerConfig cfg = quick_config(10, 1);
  cfg.y_scale = 1;
  cfg.hyper = HyperConfig::defaults(0);
  cfg.hyper.phi_bounds = PhiBounds{0.1, 1.0};
  GibbsSampler s(data, g, cfg);
  ChainState st = s.state();
  st.theta(0, 0) = 1.2;
  st.theta(1, 0) = std::log(0.9);
  s.set_state(st);
  const auto cond =
      car_conditional(1, data.y.col(0), 1.2, 0.9, g, Eigen::VectorXd::Ones(3).eval(), cfg.rho);
  const double sd = std::sqrt(cond.variance);
  const double z0 = normal_cdf(-cond.mean / sd);
  Rng rng(5);
  std::vector<double> x(100000);
  for (auto& v : x) {
    s.update_latent(0, rng);
    v = s.state().latent(1, 0);
    REQUIRE(v <= 0.0);
  }
  std::sort(x.begin(), x.end());
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf((x[i] - cond.mean) / sd) / z0;
    d = std::max({d, (i + 1.0) / x.size() - f, f - static_cast<double>(i) / x.size()});
  }
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(x.size())));
}

TEST_CASE("fully censored isolated site matches truncated-normal moments") {
  std::vector<Location> locs = {{1, 0, 0, {}, false}};
  const ArealGraph g(locs, {}, 0);
  VfSeries data{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)};
  SamplerConfig cfg = quick_config(10, 1);
  cfg.y_scale = 1;
  cfg.rho = 0.5;
  cfg.hyper = HyperConfig::defaults(0);
  cfg.hyper.phi_bounds = PhiBounds{0.1, 1.0};
  for (const double mu : {-0.3, -6.0}) {
    GibbsSampler s(data, g, cfg);
    ChainState st = s.state();
    st.theta(0, 0) = mu;
    st.theta(1, 0) = 0.0;
    s.set_state(st);
    const double sd = std::sqrt(1.0 / (1 - cfg.rho));
    const double b = -mu / sd;
    const double lam = std::exp(-0.5 * b * b) / std::sqrt(2 * std::numbers::pi) / normal_cdf(b);
    const double want = mu - sd * lam, var = sd * sd * (1 - b * lam - lam * lam);
    Rng rng(6);
    std::vector<double> x(50000);
    for (auto& v : x) {
      s.update_latent(0, rng);
      v = s.state().latent(0, 0);
    }
    CHECK(std::abs(mean(x) - want) < 3 * std::sqrt(var / x.size()) + 1e-12);
  }
}

TEST_CASE("phi is uniform on its support when there is one visit") {
  VfSeries data = small_series(2, 7);
  data.y = data.y.col(0).eval();
  data.days = Eigen::VectorXd::Zero(1);
  auto cfg = quick_config(42000, 8);
  cfg.n_burn = 2000;
  cfg.n_thin = 20;
  cfg.hyper = HyperConfig::defaults(1);
  cfg.hyper.phi_bounds = PhiBounds{0.5, 2.5};
  std::vector<Location> locs;
  for (int i = 0; i < 4; ++i) locs.push_back({i + 1, i / 2, i % 2, 30.0 * i, false});
  const auto g = build_queen_adjacency(locs);
  VfSeries small{data.y.topRows(4), data.days};
  const auto draws = run_chain(small, g, cfg);
  std::vector<double> u(draws.phi.size());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = (draws.phi[k] - 0.5) / 2.0;
  std::sort(u.begin(), u.end());
  double d = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max({d, (i + 1.0) / u.size() - u[i], u[i] - static_cast<double>(i) / u.size()});
  }
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(u.size())));
}

TEST_CASE("same seed, same draws") {
  const auto data = small_series(4, 9);
  auto cfg = quick_config(300, 10);
  const auto a = run_chain(data, vf_graph(), cfg);
  const auto b = run_chain(data, vf_graph(), cfg);
  REQUIRE(a.size() == b.size());
  for (Index d = 0; d < a.size(); ++d) {
    CHECK(a.theta[d] == b.theta[d]);
    CHECK(a.T[d] == b.T[d]);
    CHECK(a.phi[d] == b.phi[d]);
  }
  cfg.seed = 11;
  const auto c = run_chain(data, vf_graph(), cfg);
  CHECK(c.theta.back() != a.theta.back());
}

TEST_CASE("frozen proposals land near the target acceptance rate") {
  const auto data = small_series(7, 15);
  auto cfg = quick_config(3000, 16);
  const auto draws = run_chain(data, vf_graph(), cfg);
  for (const char* name : {"mu", "log_tau", "log_alpha", "phi"}) {
    REQUIRE(draws.acceptance.count(name));
    const double r = draws.acceptance.at(name).rate();
    CHECK_MESSAGE(r > 0.2, name);
    CHECK_MESSAGE(r < 0.7, name);
  }
}

TEST_CASE("spatial-only fit equals a one-visit spatiotemporal fit with a pinned hyper level") {
  const auto data = small_series(2, 17);
  const VfSeries one{data.y.col(0), Eigen::VectorXd::Zero(1)};
  const Eigen::MatrixXd prior_cov = Eigen::Vector3d(1.0, 1.0, 0.5).asDiagonal();

  auto space_cfg = quick_config(30000, 18);
  space_cfg.n_burn = 3000;
  space_cfg.hyper = HyperConfig::defaults(1);
  space_cfg.hyper.omega_delta = prior_cov;
  const auto space = fit_space_only(one, vf_graph(), space_cfg).front();

  auto st_cfg = space_cfg;
  st_cfg.seed = 19;
  st_cfg.weights = WeightForm::threshold;
  st_cfg.hyper.omega_delta = 1e-10 * Eigen::MatrixXd::Identity(3, 3);
  st_cfg.hyper.xi = 1e7;
  st_cfg.hyper.psi = (st_cfg.hyper.xi - 4) * prior_cov;
  st_cfg.hyper.phi_bounds = PhiBounds{0.1, 1.0};
  const auto st = run_chain(one, vf_graph(), st_cfg);

  for (Index k = 0; k < 3; ++k) {
    std::vector<double> a, b;
    for (const auto& th : space.theta) a.push_back(th(k, 0));
    for (const auto& th : st.theta) b.push_back(th(k, 0));
    const double se = std::hypot(batch_means_se(a), batch_means_se(b));
    CHECK_MESSAGE(std::abs(mean(a) - mean(b)) < 4 * se, "row " << k);
  }
}

TEST_CASE("draw files round trip exactly") {
  const auto data = small_series(3, 20);
  auto cfg = quick_config(60, 21);
  cfg.keep_latent = true;
  const auto draws = run_chain(data, vf_graph(), cfg);
  const auto dir = scratch_dir("draws");
  write_draws(draws, vf_graph(), (dir / "d.csv").string());
  const auto back = read_draws((dir / "d.csv").string(), vf_graph());
  REQUIRE(back.size() == draws.size());
  for (Index d = 0; d < draws.size(); ++d) {
    CHECK(back.iterations[d] == draws.iterations[d]);
    CHECK(back.theta[d] == draws.theta[d]);
    CHECK(back.delta[d] == draws.delta[d]);
    CHECK(back.T[d] == draws.T[d]);
    CHECK(back.phi[d] == draws.phi[d]);
    CHECK(back.latent[d] == draws.latent[d]);
  }
}

TEST_CASE("configuration is validated") {
  const auto data = small_series(3, 22);
  auto cfg = quick_config(100, 1);
  cfg.n_burn = 100;
  CHECK_THROWS_AS(run_chain(data, vf_graph(), cfg), std::invalid_argument);
  cfg = quick_config(100, 1);
  cfg.rho = 1.0;
  CHECK_THROWS_AS(run_chain(data, vf_graph(), cfg), std::invalid_argument);
  cfg = quick_config(100, 1);
  cfg.hyper = HyperConfig::defaults(2);
  CHECK_THROWS_AS(run_chain(data, vf_graph(), cfg), std::invalid_argument);
  VfSeries bad = data;
  bad.y = bad.y.topRows(10).eval();
  CHECK_THROWS_AS(run_chain(bad, vf_graph(), quick_config(100, 1)), std::invalid_argument);
}
