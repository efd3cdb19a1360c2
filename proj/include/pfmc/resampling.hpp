#pragma once

#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "pfmc/errors.hpp"
#include "pfmc/weights.hpp"

namespace pfmc {

template <typename S>
concept UniformSource = requires(S s) {
  { s.uniform() } -> std::convertible_to<double>;
};

/// Stratified resampling: index m inverts the weight CDF at
/// u_m = (m + v_m) / M with v_m ~ U(0,1), m = 0..M-1. The u_m are
/// increasing, so the CDF is walked once in natural index order.
template <UniformSource S>
std::vector<std::uint32_t> stratified_resample(std::span<const double> probs,
                                               std::size_t n_draws, S& src) {
  if (probs.empty() || n_draws == 0) throw ConfigError("stratified_resample: empty input");
  std::vector<std::uint32_t> idx(n_draws);
  std::size_t j = 0;
  double cdf = probs[0];
  const double inv_m = 1.0 / static_cast<double>(n_draws);
  for (std::size_t m = 0; m < n_draws; ++m) {
    const double u = (static_cast<double>(m) + src.uniform()) * inv_m;
    while (u > cdf && j + 1 < probs.size()) cdf += probs[++j];
    idx[m] = static_cast<std::uint32_t>(j);
  }
  return idx;
}

/// Multinomial resampling: M independent inverse-CDF lookups at iid uniforms.
template <UniformSource S>
std::vector<std::uint32_t> multinomial_resample(std::span<const double> probs,
                                                std::size_t n_draws, S& src) {
  if (probs.empty() || n_draws == 0) throw ConfigError("multinomial_resample: empty input");
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  std::vector<std::uint32_t> idx(n_draws);
  for (std::size_t m = 0; m < n_draws; ++m) {
    const double u = src.uniform();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    idx[m] = static_cast<std::uint32_t>(
        it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin()));
  }
  return idx;
}

template <UniformSource S>
std::vector<std::uint32_t> stratified_resample(const WeightVector& w, std::size_t n_draws,
                                               S& src) {
  return stratified_resample(std::span<const double>(w.normalized), n_draws, src);
}

template <UniformSource S>
std::vector<std::uint32_t> multinomial_resample(const WeightVector& w, std::size_t n_draws,
                                                S& src) {
  return multinomial_resample(std::span<const double>(w.normalized), n_draws, src);
}

}  // namespace pfmc
