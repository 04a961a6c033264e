#pragma once

#include <cstddef>
#include <span>

namespace entropic {

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;   // paths that entered the estimate
  std::size_t excluded = 0;  // diverged paths dropped
};

// Pairwise summation; the association order depends only on the length.
double pairwise_sum(std::span<const double> values);

// Sample mean and standard error sqrt(var / n) with the unbiased variance.
Estimate sample_mean(std::span<const double> values);

// |a - b| <= k * sqrt(se_a^2 + se_b^2) + allowance, for independent estimates.
bool within_sigma(double a, double b, double combined_se, double k, double allowance = 0.0);
double combined_error(double se_a, double se_b);

}  // namespace entropic
