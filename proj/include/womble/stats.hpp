#pragma once

// Small descriptive statistics over std::vector<double>.

#include <vector>

namespace womble {

double mean(const std::vector<double>& v);
/// n - 1 denominator.
double sample_sd(const std::vector<double>& v);
/// Linear interpolation between order statistics (R type 7).
double quantile(std::vector<double> v, double p);
/// Standard error of the mean from non-overlapping batch means.
double batch_means_se(const std::vector<double>& v, int num_batches = 25);

}  // namespace womble
