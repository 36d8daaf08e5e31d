#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bohmkit {

/// Pairwise (cascade) summation: the order of additions depends only on
/// the length, so results are reproducible.
double pairwise_sum(std::span<const double> x);

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  std::size_t n = 0;
};

MeanStderr mean_stderr(std::span<const double> x);

struct Chi2Result {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

/// Upper tail of the chi-squared distribution.
double chi2_survival(double statistic, std::size_t dof);

/// Pearson test of samples against a reference CDF using equal-probability
/// bins. The number of bins is min(max_bins, n / 20), so every bin expects at
/// least 20 counts (and never fewer than 2 bins are used).
Chi2Result chi2_equiprobable(std::span<const double> samples,
                             const std::function<double(double)>& cdf,
                             const std::function<double(double)>& quantile,
                             std::size_t max_bins = 50);

/// Pearson test of observed counts against expected counts; bins with
/// expected count below 5 are merged with their neighbours first.
Chi2Result chi2_counts(std::span<const double> observed, std::span<const double> expected);

/// Kolmogorov-Smirnov statistic sup|F_n - F|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace bohmkit
