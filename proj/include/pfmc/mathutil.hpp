#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace pfmc {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double sq(double x) { return x * x; }

inline double normal_logpdf(double x, double mean, double var) {
  return -0.5 * (kLogTwoPi + std::log(var) + sq(x - mean) / var);
}

inline double logistic(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// log(1 + e^x), stable for large |x|.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double log_sum_exp(std::span<const double> v);
inline double log_mean_exp(std::span<const double> v) {
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

/// Standard normal quantile (Wichura's AS 241, double precision).
double norm_ppf(double p);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);
inline double sample_sd(std::span<const double> v) { return std::sqrt(sample_variance(v)); }

/// Linear-interpolation quantile (copies its input).
double quantile(std::span<const double> v, double q);
inline double median(std::span<const double> v) { return quantile(v, 0.5); }
inline double iqr(std::span<const double> v) { return quantile(v, 0.75) - quantile(v, 0.25); }

}  // namespace pfmc
