#pragma once

#include <span>
#include <vector>

#include "pfmc/errors.hpp"
#include "pfmc/mathutil.hpp"

namespace pfmc {

/// One set of particle weights: log unnormalized values, the normalized
/// probabilities, and log of their arithmetic mean. Normalization is
/// shift-invariant: adding c to every log weight adds c to log_mean and
/// leaves `normalized` unchanged.
struct WeightVector {
  std::vector<double> log_unnorm;
  std::vector<double> normalized;
  double log_mean = 0.0;  // log((1/M) sum_k w_k)
};

/// Max-shift normalization. Entries may be -inf; throws TotalWeightZero if
/// all of them are.
inline WeightVector normalize_log_weights(std::vector<double> logw) {
  if (logw.empty()) throw ConfigError("normalize_log_weights: empty input");
  double m = kNegInf;
  for (double w : logw) m = std::max(m, w);
  if (m == kNegInf) throw TotalWeightZero();
  WeightVector out;
  out.normalized.resize(logw.size());
  double s = 0.0;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    out.normalized[k] = std::exp(logw[k] - m);
    s += out.normalized[k];
  }
  for (double& p : out.normalized) p /= s;
  out.log_mean = m + std::log(s) - std::log(static_cast<double>(logw.size()));
  out.log_unnorm = std::move(logw);
  return out;
}

inline WeightVector normalize_log_weights(std::span<const double> logw) {
  return normalize_log_weights(std::vector<double>(logw.begin(), logw.end()));
}

}  // namespace pfmc
