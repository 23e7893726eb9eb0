#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cbdp {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov survival function P(K > x).
double kolmogorov_sf(double x);

// One-sample KS against a continuous CDF; p-value uses the Stephens
// small-sample correction sqrt(n) + 0.12 + 0.11/sqrt(n).
TestResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

// Two-sample KS with the effective size n m / (n + m).
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Pearson goodness of fit; degrees of freedom = cells - 1.
TestResult chi_square_gof(std::span<const double> observed, std::span<const double> expected);

// Contingency test of two count vectors over the same cells (cells with zero
// total are dropped); degrees of freedom = used cells - 1.
TestResult chi_square_two_sample(std::span<const double> a, std::span<const double> b);

// Mean and standard error of the mean.
struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};
MeanEstimate mean_estimate(std::span<const double> values);

}  // namespace cbdp
