#include "wsim/stats.hpp"

#include "wsim/types.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wsim {

double chi2_cdf(double x, double df) {
  if (!(df > 0.0)) throw ConfigError("chi-square degrees of freedom must be positive");
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::chi_squared_distribution<double>(df), x);
}

double chi2_quantile(double probability, double df) {
  if (!(df > 0.0)) throw ConfigError("chi-square degrees of freedom must be positive");
  if (!(probability > 0.0 && probability < 1.0)) throw ConfigError("probability must lie in (0, 1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), probability);
}

double ks_distance(std::vector<double> samples, double df) {
  if (samples.size() < 20) throw DataError("KS distance needs at least 20 samples");
  if (!std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); })) {
    throw DataError("KS distance: non-finite sample");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = chi2_cdf(samples[i], df);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

double loglog_slope(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw DataError("log-log slope needs at least 3 pairs");
  std::vector<double> x, y;
  for (const auto& [n, v] : pairs) {
    if (!(n > 0.0 && v > 0.0) || !std::isfinite(v)) throw DataError("log-log slope needs positive values");
    x.push_back(std::log(n));
    y.push_back(std::log(v));
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DataError("log-log slope needs at least two distinct sample sizes");
  return sxy / sxx;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw DataError("mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace wsim
