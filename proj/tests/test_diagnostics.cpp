#include "support.hpp"

#include "womble/diagnostics.hpp"
#include "womble/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include <algorithm>

using namespace womble;
using namespace testing;

namespace {

// Fraction of concordant (positive, negative) pairs, ties counting one half.
double concordance_auc(const std::vector<double>& s, const std::vector<int>& y) {
  long twice = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      ++pairs;
      twice += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
    }
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pairs));
}

double logistic_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const Eigen::VectorXd& beta) {
  double ll = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    double eta = beta(0);
    for (Index c = 0; c < x.cols(); ++c) eta += beta(c + 1) * x(i, c);
    ll += y(i) * eta - std::log1p(std::exp(eta));
  }
  return ll;
}

VfSeries series_from(const Eigen::MatrixXd& y, const Eigen::VectorXd& days) { return {y, days}; }

}  // namespace

TEST_CASE("coefficient of variation over visits") {
  CHECK(mean_row_cv(Eigen::RowVector3d(1, 2, 3)) == doctest::Approx(0.5));
  CHECK(mean_row_cv(Eigen::MatrixXd::Constant(5, 4, 2.7)) == 0.0);
  CHECK_THROWS(mean_row_cv(Eigen::MatrixXd::Ones(3, 1)));

  Rng rng(41);
  PosteriorDraws d;
  for (int k = 0; k < 30; ++k) d.theta.push_back(random_vector(12, rng).reshaped(3, 4));
  double expect = 0;
  for (const auto& th : d.theta) {
    std::vector<double> a;
    for (Index t = 0; t < 4; ++t) a.push_back(std::exp(th(2, t)));
    expect += sample_sd(a) / mean(a);
  }
  CHECK(st_cv(d) == doctest::Approx(expect / 30).epsilon(1e-12));

  // Scaling every alpha by a constant leaves the CV alone.
  PosteriorDraws scaled = d;
  for (auto& th : scaled.theta) th.row(2).array() += 1.7;
  CHECK(st_cv(scaled) == doctest::Approx(st_cv(d)).epsilon(1e-12));

  // Space CV pairs per-visit draws by index.
  std::vector<PosteriorDraws> per_visit(4);
  for (Index t = 0; t < 4; ++t) {
    for (const auto& th : d.theta) per_visit[t].theta.push_back(th.col(t));
  }
  CHECK(space_cv(per_visit) == doctest::Approx(st_cv(d)).epsilon(1e-12));
}

TEST_CASE("mean CV") {
  Eigen::MatrixXd y(2, 3);
  y << 30, 30, 10, 30, 30, 20;
  CHECK(mean_cv(series_from(y, Eigen::Vector3d(0, 1, 2))) == doctest::Approx(0.346410161513775).epsilon(1e-12));
  CHECK(mean_cv(series_from(Eigen::MatrixXd::Constant(4, 3, 12.0), Eigen::Vector3d(0, 1, 2))) == 0.0);
  CHECK_THROWS(mean_cv(series_from(Eigen::MatrixXd::Ones(4, 1), Eigen::VectorXd::Zero(1))));

  Rng rng(42);
  for (int k = 0; k < 20; ++k) {
    Eigen::MatrixXd r(6, 5);
    for (Index i = 0; i < r.size(); ++i) r.data()[i] = 30 * uniform01(rng);
    std::vector<double> means;
    for (Index t = 0; t < 5; ++t) means.push_back(r.col(t).sum() / 6);
    const double expect = sample_sd(means) / mean(means);
    CHECK(mean_cv(series_from(r, Eigen::VectorXd::LinSpaced(5, 0, 400))) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("pointwise linear regression") {
  const Eigen::Vector4d days(0, 100, 250, 400);
  CHECK(plr_min_p(series_from(Eigen::MatrixXd::Constant(3, 4, 25.0), days)) == 1.0);
  Eigen::MatrixXd y(2, 4);
  y << 30 - 0.01 * days.transpose().array(), Eigen::RowVector4d(20, 22, 19, 21);
  CHECK(plr_min_p(series_from(y, days)) == 0.0);
  CHECK_THROWS(plr_min_p(series_from(Eigen::MatrixXd::Ones(3, 2), Eigen::Vector2d(0, 1))));

  // Longhand OLS with the t tail from the regularized incomplete beta.
  Rng rng(43);
  for (int k = 0; k < 20; ++k) {
    const int nu = 3 + k % 6;
    const Eigen::VectorXd d = random_days(nu, rng, 200);
    Eigen::MatrixXd v(4, nu);
    for (Index i = 0; i < v.size(); ++i) v.data()[i] = 20 + 5 * std_normal(rng);
    double best = 1;
    for (Index i = 0; i < 4; ++i) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (int t = 0; t < nu; ++t) {
        sx += d(t);
        sy += v(i, t);
        sxx += d(t) * d(t);
        sxy += d(t) * v(i, t);
      }
      const double b = (nu * sxy - sx * sy) / (nu * sxx - sx * sx);
      const double a = (sy - b * sx) / nu;
      double sse = 0;
      for (int t = 0; t < nu; ++t) sse += std::pow(v(i, t) - a - b * d(t), 2);
      const double se = std::sqrt(sse / (nu - 2) / (sxx - sx * sx / nu));
      const double tstat = b / se, df = nu - 2;
      best = std::min(best, boost::math::ibeta(df / 2, 0.5, df / (df + tstat * tstat)));
    }
    CHECK(plr_min_p(series_from(v, d)) == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("logistic regression closed forms") {
  // 2x2 table: exposed 12 cases / 5 controls, unexposed 4 cases / 9 controls.
  std::vector<double> xs;
  std::vector<int> ys;
  const auto add = [&](double x, int y, int n) {
    for (int k = 0; k < n; ++k) {
      xs.push_back(x);
      ys.push_back(y);
    }
  };
  add(1, 1, 12);
  add(1, 0, 5);
  add(0, 1, 4);
  add(0, 0, 9);
  const Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
  const Eigen::VectorXi y = Eigen::Map<Eigen::VectorXi>(ys.data(), ys.size());
  const auto fit = logistic_fit(x, y, {"exposed"});
  CHECK(fit.converged);
  CHECK(fit.names.front() == "(Intercept)");
  CHECK(fit.coef(1) == doctest::Approx(std::log((12.0 * 9.0) / (5.0 * 4.0))).epsilon(1e-9));
  CHECK(fit.coef(0) == doctest::Approx(std::log(4.0 / 9.0)).epsilon(1e-9));
  CHECK(fit.se(1) == doctest::Approx(std::sqrt(1 / 12.0 + 1 / 5.0 + 1 / 4.0 + 1 / 9.0)).epsilon(1e-8));
  CHECK(fit.aic == doctest::Approx(-2 * fit.loglik + 4));

  const auto null = logistic_fit(Eigen::MatrixXd(y.size(), 0), y);
  CHECK(null.coef(0) == doctest::Approx(std::log(16.0 / 14.0)).epsilon(1e-10));
  const double lr = 2 * (fit.loglik - null.loglik);
  CHECK(likelihood_ratio_p(null, fit) == doctest::Approx(std::erfc(std::sqrt(lr / 2))).epsilon(1e-10));
}

TEST_CASE("logistic regression matches a grid-search MLE and solves the score equations") {
  Rng rng(44);
  const int n = 60;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXi y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = std_normal(rng);
    x(i, 1) = std_normal(rng);
    y(i) = uniform01(rng) < 0.5 ? 1 : 0;
  }
  const auto fit = logistic_fit(x, y);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.z(1)) < 4);

  // Coordinate grid refinement of the log-likelihood.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(3);
  for (double step = 1.0; step > 1e-9; step /= 4) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (Index j = 0; j < 3; ++j) {
        for (double dir : {-1.0, 1.0}) {
          Eigen::VectorXd cand = beta;
          cand(j) += dir * step;
          if (logistic_loglik(x, y, cand) > logistic_loglik(x, y, beta)) {
            beta = cand;
            moved = true;
          }
        }
      }
    }
  }
  CHECK((fit.coef - beta).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(fit.loglik == doctest::Approx(logistic_loglik(x, y, fit.coef)).epsilon(1e-12));

  for (Index j = 0; j < 3; ++j) {
    const double h = 1e-5;
    Eigen::VectorXd up = fit.coef, dn = fit.coef;
    up(j) += h;
    dn(j) -= h;
    CHECK(std::abs((logistic_loglik(x, y, up) - logistic_loglik(x, y, dn)) / (2 * h)) < 1e-6);
  }
}

TEST_CASE("logistic regression flags separation and aliasing") {
  Eigen::VectorXd x(8);
  x << 1, 2, 3, 4, 5, 6, 7, 8;
  Eigen::VectorXi y(8);
  y << 0, 0, 0, 0, 1, 1, 1, 1;
  CHECK(logistic_fit(x, y).separation);
  Eigen::MatrixXd two(8, 2);
  two << x, Eigen::VectorXd::Constant(8, 3.0);
  y << 0, 1, 0, 1, 1, 0, 1, 1;
  const auto fit = logistic_fit(two, y);
  CHECK(fit.aliased[2]);
  CHECK(std::isnan(fit.coef(2)));
  CHECK_FALSE(fit.separation);
}

TEST_CASE("sweep AUC equals pairwise concordance exhaustively on small sets") {
  for (int n = 2; n <= 6; ++n) {
    int pow3 = 1;
    for (int k = 0; k < n; ++k) pow3 *= 3;
    for (int lab = 1; lab < (1 << n) - 1; ++lab) {
      std::vector<int> y(n);
      for (int k = 0; k < n; ++k) y[k] = (lab >> k) & 1;
      for (int code = 0; code < pow3; ++code) {
        std::vector<double> s(n);
        for (int k = 0, c = code; k < n; ++k, c /= 3) s[k] = c % 3;
        REQUIRE(roc_auc_pauc(s, y).auc == concordance_auc(s, y));
      }
    }
  }
}

TEST_CASE("ROC spot values") {
  const std::vector<int> y = {0, 0, 1, 1};
  auto r = roc_auc_pauc({0.1, 0.2, 0.8, 0.9}, y);
  CHECK(r.auc == 1.0);
  CHECK(r.pauc == doctest::Approx(0.15));
  CHECK(r.pauc_mcclish == doctest::Approx(1.0));
  CHECK(r.curve.front().threshold == std::numeric_limits<double>::infinity());
  CHECK(r.curve.back().threshold == -std::numeric_limits<double>::infinity());
  r = roc_auc_pauc({0.5, 0.5, 0.5, 0.5}, y);
  CHECK(r.auc == 0.5);
  CHECK(r.pauc == doctest::Approx(0.15 * 0.15 / 2));
  CHECK(r.pauc_mcclish == doctest::Approx(0.5));
  CHECK_THROWS(roc_auc_pauc({1, 2}, {1, 1}));

  Rng rng(45);
  std::vector<double> s(4000);
  std::vector<int> l(4000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = uniform01(rng);
    l[i] = uniform01(rng) < 0.5;
  }
  CHECK(roc_auc_pauc(s, l).auc == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("specificity-constrained threshold") {
  const std::vector<double> s = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<int> y = {0, 0, 0, 1, 0, 0, 1, 1, 1, 1};
  const double th = threshold_for_specificity(s, y, 0.8);
  int tn = 0, neg = 0, tp = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    neg += !y[i];
    tn += !y[i] && s[i] < th;
    tp += y[i] && s[i] >= th;
  }
  CHECK(static_cast<double>(tn) / neg >= 0.8);
  // Negatives at 1,2,3,5,6: the cut sits above 5, so the positive at 4 is lost.
  CHECK(tp == 4);
}

TEST_CASE("paired bootstrap comparison") {
  Rng rng(46);
  std::vector<double> a(80), b(80);
  std::vector<int> y(80);
  for (int i = 0; i < 80; ++i) {
    y[i] = i % 2;
    a[i] = std_normal(rng) + 0.2 * y[i];
    b[i] = std_normal(rng) + 2.0 * y[i];
  }
  const auto c = bootstrap_compare(a, b, y, 500, 7);
  CHECK(c.auc_diff > 0);
  CHECK(c.auc_p < 0.01);
  const auto same = bootstrap_compare(a, a, y, 200, 7);
  CHECK(same.auc_diff == 0);
  CHECK(same.auc_p == 1);
  const auto again = bootstrap_compare(a, b, y, 500, 7);
  CHECK(again.auc_p == c.auc_p);
}

TEST_CASE("metric files round trip") {
  std::vector<MetricRecord> recs = {{"P1", 0.1, 0.2, 0.3, 0.04, 1}, {"P2", 1.0 / 3, 2.5, 0.7, 1e-12, std::nullopt}};
  const auto dir = scratch_dir("metrics");
  write_metrics(recs, (dir / "m.csv").string());
  const auto back = read_metrics((dir / "m.csv").string());
  REQUIRE(back.size() == 2);
  CHECK(back[0].st_cv == recs[0].st_cv);
  CHECK(back[1].st_cv == recs[1].st_cv);
  CHECK(back[1].plr_minp == recs[1].plr_minp);
  CHECK(back[0].label == 1);
  CHECK_FALSE(back[1].label.has_value());
}

TEST_CASE("comparison table and follow-up scoring") {
  Rng rng(47);
  std::vector<MetricRecord> recs;
  for (int i = 0; i < 40; ++i) {
    const int lab = i < 20;
    recs.push_back({"P" + std::to_string(i), 0.2 + 0.15 * lab + 0.1 * uniform01(rng), 0.5 + uniform01(rng),
                    0.05 + 0.05 * uniform01(rng), uniform01(rng), lab});
  }
  const auto table = comparison_table(recs, 200, 3);
  REQUIRE(table.rows.size() == 3);
  CHECK_FALSE(table.rows[0].lrt_p.has_value());
  CHECK(table.rows[2].lrt_p.has_value());

  const auto uni = univariate_table(recs);
  REQUIRE(uni.size() == 4);
  CHECK(uni[0].metric == "st_cv");
  CHECK(uni[0].estimate > 0);

  // A no-op truncation reproduces the end-of-study scores.
  const auto same = early_followup(table, recs, {1000.0}, [&](std::size_t i, double) {
    return std::optional<MetricRecord>(recs[i]);
  });
  for (std::size_t m = 0; m < table.rows.size(); ++m) {
    CHECK(same.points[m].pauc == table.rows[m].pauc);
    CHECK(same.points[m].n_used == 40);
  }
  const auto probs = table.models[2].probabilities(metric_matrix(recs));
  for (const auto& p : same.probabilities) {
    if (p.model != table.models[2].spec.name) continue;
    const auto idx = std::stoul(p.patient.substr(1));
    CHECK(p.probability == probs(static_cast<Index>(idx)));
  }

  // Truncations that drop patients count them as skipped.
  const auto sparse = early_followup(table, recs, {100.0, 200.0}, [&](std::size_t i, double day) {
    return day < 150 && i % 2 ? std::nullopt : std::optional<MetricRecord>(recs[i]);
  });
  CHECK(sparse.points.front().n_skipped == 20);
}

TEST_CASE("identical patients give flat one-half probabilities") {
  std::vector<MetricRecord> recs;
  for (int i = 0; i < 10; ++i) recs.push_back({"P" + std::to_string(i), 0.3, 0.4, 0.1, 0.5, i % 2});
  const auto fit = logistic_fit(Standardizer::fit(metric_matrix(recs)).apply(metric_matrix(recs)),
                                Eigen::Map<const Eigen::VectorXi>(metric_labels(recs).data(), 10));
  const Eigen::VectorXd p = fit.probabilities(metric_matrix(recs));
  CHECK((p.array() - 0.5).abs().maxCoeff() < 1e-12);
}
