#pragma once

// Summary statistics for Monte Carlo studies.

#include <utility>
#include <vector>

namespace wsim {

double chi2_cdf(double x, double df);
double chi2_quantile(double probability, double df);

/// One-sample Kolmogorov-Smirnov distance to the chi-square(df) law.
/// Requires at least 20 finite samples (DataError otherwise).
double ks_distance(std::vector<double> samples, double df);

/// OLS slope of log(value) on log(n) for (n, value) pairs. Requires at least
/// three pairs with positive entries and two distinct n (DataError otherwise).
double loglog_slope(const std::vector<std::pair<double, double>>& pairs);

double mean(const std::vector<double>& values);
double median(std::vector<double> values);

}  // namespace wsim
