#include "support.hpp"

#include "womble/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace womble;
using namespace testing;

namespace {

// Kolmogorov-Smirnov statistic of a sample against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// Critical value of the one-sample KS statistic at the 1% level.
double ks_critical(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

// Mean and variance of N(m, s^2) truncated to (-inf, u].
std::pair<double, double> upper_truncated_moments(double m, double s, double u) {
  const double b = (u - m) / s;
  const double pdf = std::exp(-0.5 * b * b) / std::sqrt(2 * std::numbers::pi);
  const double cdf = normal_cdf(b);
  const double lam = pdf / cdf;
  return {m - s * lam, s * s * (1 - b * lam - lam * lam)};
}

}  // namespace

TEST_CASE("derived seeds are distinct and reproducible") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 100; ++a) {
    for (std::uint64_t b = 0; b < 10; ++b) seen.insert(derive_seed(42, a, b));
  }
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("normal quantile inverts the CDF") {
  for (double p : {1e-10, 0.001, 0.1, 0.5, 0.8, 0.999}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("upper-truncated normal moments") {
  Rng rng(1);
  for (const auto [m, s, u] : {std::tuple{0.0, 1.0, 0.0}, {2.0, 0.5, 0.0}, {-3.0, 1.0, 0.0}, {12.0, 1.0, 0.0},
                                {40.0, 1.5, 0.0}}) {
    const int n = 100000;
    std::vector<double> x(n);
    for (auto& v : x) {
      v = truncated_normal_upper(m, s, u, rng);
      REQUIRE(v <= u);
    }
    const auto [em, ev] = upper_truncated_moments(m, s, u);
    const double se = std::sqrt(ev / n);
    CHECK(std::abs(mean(x) - em) < 4 * se);
    CHECK(sample_sd(x) * sample_sd(x) == doctest::Approx(ev).epsilon(0.03));
  }
}

TEST_CASE("upper-truncated normal passes a KS test") {
  Rng rng(2);
  const double m = 0.7, s = 1.3, u = 0.0;
  std::vector<double> x(100000);
  for (auto& v : x) v = truncated_normal_upper(m, s, u, rng);
  const double zc = normal_cdf((u - m) / s);
  const double d = ks_statistic(x, [&](double v) { return normal_cdf((v - m) / s) / zc; });
  CHECK(d < ks_critical(x.size()));
}

TEST_CASE("exponential-proposal tail sampler passes a KS test") {
  Rng rng(3);
  const double a = 9.0;
  std::vector<double> x(50000);
  for (auto& v : x) {
    v = robert_tail_normal(a, rng);
    REQUIRE(v >= a);
  }
  // Upper tail CDF via the Mills-ratio-free identity on complements.
  const double tail = std::erfc(a / std::sqrt(2.0));
  const double d = ks_statistic(x, [&](double v) { return 1 - std::erfc(v / std::sqrt(2.0)) / tail; });
  CHECK(d < ks_critical(x.size()));
}

TEST_CASE("multivariate normal covariance") {
  Rng rng(6);
  const Eigen::MatrixXd cov = random_spd(3, rng);
  const Eigen::Vector3d mu(1, -2, 0.5);
  const int n = 100000;
  Eigen::MatrixXd x(3, n);
  for (int k = 0; k < n; ++k) x.col(k) = mvn_from_covariance(mu, cov, rng);
  const Eigen::VectorXd m = x.rowwise().mean();
  const Eigen::MatrixXd c = x.colwise() - m;
  const Eigen::MatrixXd emp = c * c.transpose() / (n - 1);
  CHECK((m - mu).cwiseAbs().maxCoeff() < 0.03);
  CHECK((emp - cov).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("inverse-Wishart first moment") {
  Rng rng(7);
  const Eigen::MatrixXd scale = random_spd(3, rng);
  const double df = 12;
  const int n = 40000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(3, 3);
  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixXd w = inverse_wishart(df, scale, rng);
    REQUIRE((w - w.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    sum += w;
  }
  const Eigen::MatrixXd expect = scale / (df - 3 - 1);
  CHECK(((sum / n) - expect).cwiseAbs().maxCoeff() < 0.02 * expect.cwiseAbs().maxCoeff() + 0.005);
}

TEST_CASE("Poisson mean") {
  Rng rng(8);
  std::vector<double> x(50000);
  for (auto& v : x) v = poisson(117.25, rng);
  CHECK(std::abs(mean(x) - 117.25) < 4 * std::sqrt(117.25 / x.size()));
}

TEST_CASE("descriptive statistics") {
  CHECK(mean({1, 2, 3}) == 2);
  CHECK(sample_sd({1, 2, 3}) == 1);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({1, 2, 3, 4}, 0.0) == 1);
  CHECK(quantile({1, 2, 3, 4}, 1.0) == 4);
  CHECK(quantile({10, 20, 30, 40, 50}, 0.1) == doctest::Approx(14));
  std::vector<double> iid(10000);
  Rng rng(9);
  for (auto& v : iid) v = std_normal(rng);
  CHECK(batch_means_se(iid) == doctest::Approx(0.01).epsilon(0.35));
}
