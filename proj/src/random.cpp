#include "womble/random.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace womble {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

double std_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

double uniform01(Rng& rng) {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0 && p < 1)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2 * p);
}

double robert_tail_normal(double a, Rng& rng) {
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(uniform01(rng)) / lambda;
    if (std::log(uniform01(rng)) <= -0.5 * (z - lambda) * (z - lambda)) return z;
  }
}

double truncated_normal_upper(double mean, double sd, double upper, Rng& rng) {
  if (!(sd > 0)) throw std::domain_error("truncated normal needs sd > 0");
  const double b = (upper - mean) / sd;
  if (b < -5.0) return mean - sd * robert_tail_normal(-b, rng);
  const double pb = normal_cdf(b);
  const double x = normal_quantile(uniform01(rng) * pb);
  return mean + sd * std::min(x, b);
}

Eigen::VectorXd std_normal_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = std_normal(rng);
  return z;
}

Eigen::VectorXd mvn_from_covariance(const Eigen::Ref<const Eigen::VectorXd>& mean,
                                    const Eigen::Ref<const Eigen::MatrixXd>& cov, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("MVN covariance is not positive definite");
  return mean + llt.matrixL() * std_normal_vector(mean.size(), rng);
}

Eigen::MatrixXd inverse_wishart(double df, const Eigen::Ref<const Eigen::MatrixXd>& scale, Rng& rng) {
  const Eigen::Index p = scale.rows();
  if (!(df > p - 1)) throw std::domain_error("inverse-Wishart needs df > p - 1");
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success) throw std::runtime_error("inverse-Wishart scale is not positive definite");

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    std::gamma_distribution<double> chi2(0.5 * (df - static_cast<double>(i)), 2.0);
    a(i, i) = std::sqrt(chi2(rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = std_normal(rng);
  }
  // X = U A^{-T} A^{-1} U' with scale = U U'.
  const Eigen::MatrixXd a_inv_t =
      a.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd m = llt.matrixL() * a_inv_t;
  Eigen::MatrixXd x = m * m.transpose();
  return 0.5 * (x + x.transpose());
}

int poisson(double rate, Rng& rng) { return std::poisson_distribution<int>(rate)(rng); }

}  // namespace womble
