#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace womble {

using Rng = std::mt19937_64;

/// Independent stream seed from a master seed and up to two stream ids
/// (chain, patient, replicate ...), via splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

double std_normal(Rng& rng);
double uniform01(Rng& rng);  // open interval (0, 1)

double normal_cdf(double x);
double normal_quantile(double p);

/// N(mean, sd^2) truncated to (-inf, upper]. Inverse-CDF sampling, falling
/// back to Robert's exponential-proposal rejection deep in the tail.
double truncated_normal_upper(double mean, double sd, double upper, Rng& rng);

/// N(0, 1) truncated to [a, inf) by Robert's exponential rejection; a > 0.
double robert_tail_normal(double a, Rng& rng);

Eigen::VectorXd std_normal_vector(Eigen::Index n, Rng& rng);

/// MVN(mean, cov) via Cholesky of the covariance.
Eigen::VectorXd mvn_from_covariance(const Eigen::Ref<const Eigen::VectorXd>& mean,
                                    const Eigen::Ref<const Eigen::MatrixXd>& cov, Rng& rng);

/// Inverse-Wishart(df, scale) with E[X] = scale / (df - p - 1), by the
/// Bartlett decomposition.
Eigen::MatrixXd inverse_wishart(double df, const Eigen::Ref<const Eigen::MatrixXd>& scale, Rng& rng);

int poisson(double rate, Rng& rng);

}  // namespace womble
