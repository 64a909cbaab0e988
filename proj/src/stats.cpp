#include "cbpscan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cbpscan::stats {

double norm_pdf(double x) {
  static const double kInvSqrt2Pi = 0.3989422804014326779399461;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
  static const double kInvSqrt2 = 0.7071067811865475244008444;
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double ks_statistic_uniform(std::vector<double> sample) {
  if (sample.empty()) {
    throw std::invalid_argument("ks_statistic_uniform: empty sample");
  }
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double x = std::min(std::max(sample[i], 0.0), 1.0);
    const double hi = (static_cast<double>(i) + 1.0) / n - x;
    const double lo = x - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0 || alpha <= 0.0 || alpha >= 1.0) {
    throw std::invalid_argument("ks_critical_value: need n > 0 and alpha in (0,1)");
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  const double k_alpha = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return k_alpha / (root_n + 0.12 + 0.11 / root_n);
}

double binomial_sf(std::size_t k, std::size_t n, double p) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("binomial_sf: p outside [0,1]");
  }
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
  long double total = 0.0L;
  for (std::size_t j = k; j <= n; ++j) {
    const double jd = static_cast<double>(j);
    const double log_pmf = log_n_fact - std::lgamma(jd + 1.0) -
                           std::lgamma(static_cast<double>(n - j) + 1.0) +
                           jd * log_p + static_cast<double>(n - j) * log_q;
    total += std::exp(static_cast<long double>(log_pmf));
  }
  return std::min(1.0, static_cast<double>(total));
}

}  // namespace cbpscan::stats
