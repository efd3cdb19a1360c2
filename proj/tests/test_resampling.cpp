#include <doctest.h>

#include <cmath>
#include <vector>

#include "pfmc/mathutil.hpp"
#include "pfmc/random.hpp"
#include "pfmc/resampling.hpp"

using namespace pfmc;

namespace {

struct ConstantSource {
  double value;
  double uniform() { return value; }
};

std::vector<long> counts(const std::vector<std::uint32_t>& idx, std::size_t n) {
  std::vector<long> c(n, 0);
  for (auto i : idx) ++c[i];
  return c;
}

}  // namespace

TEST_CASE("stratified: uniform weights give one copy each") {
  ConstantSource half{0.5};
  const std::vector<double> probs = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto idx = stratified_resample(std::span<const double>(probs), 3, half);
  CHECK(idx == std::vector<std::uint32_t>{0, 1, 2});
}

TEST_CASE("stratified: degenerate weight takes every slot") {
  RandomStream rs(1, 0);
  const std::vector<double> probs = {1.0, 0.0};
  const auto idx = stratified_resample(std::span<const double>(probs), 2, rs);
  CHECK(idx == std::vector<std::uint32_t>{0, 0});
}

TEST_CASE("stratified: hand CDF inversion at u = (0.1,0.3,0.5,0.7,0.9)") {
  ConstantSource half{0.5};
  const std::vector<double> probs = {0.2, 0.8};
  const auto idx = stratified_resample(std::span<const double>(probs), 5, half);
  CHECK(counts(idx, 2) == std::vector<long>{1, 4});
}

TEST_CASE("multinomial: degenerate weight") {
  RandomStream rs(2, 0);
  const std::vector<double> probs = {1.0, 0.0};
  const auto idx = multinomial_resample(std::span<const double>(probs), 3, rs);
  CHECK(idx == std::vector<std::uint32_t>{0, 0, 0});
}

TEST_CASE("multinomial: binomial concentration at M = 10000") {
  RandomStream rs(3, 0);
  const std::vector<double> probs = {0.5, 0.5};
  const auto idx = multinomial_resample(std::span<const double>(probs), 10000, rs);
  const auto c = counts(idx, 2);
  CHECK(std::fabs(static_cast<double>(c[0]) - 5000.0) <= 4.0 * std::sqrt(10000 * 0.25));
}

TEST_CASE("count means match M pi within 3 SE; stratified variance dominates") {
  const std::vector<double> probs = {0.2, 0.3, 0.5};
  const std::size_t m = 7;
  const int reps = 10000;

  std::vector<double> mean_s(3, 0.0), mean_m(3, 0.0), var_s(3, 0.0), var_m(3, 0.0);
  RandomStream rs(99, 0);
  std::vector<std::vector<long>> cs, cm;
  for (int r = 0; r < reps; ++r) {
    RandomStream rs_s = rs.fork(2 * r);
    RandomStream rs_m = rs.fork(2 * r + 1);
    cs.push_back(counts(stratified_resample(std::span<const double>(probs), m, rs_s), 3));
    cm.push_back(counts(multinomial_resample(std::span<const double>(probs), m, rs_m), 3));
  }
  for (int k = 0; k < 3; ++k) {
    for (int r = 0; r < reps; ++r) {
      mean_s[k] += cs[r][k];
      mean_m[k] += cm[r][k];
    }
    mean_s[k] /= reps;
    mean_m[k] /= reps;
    for (int r = 0; r < reps; ++r) {
      var_s[k] += sq(cs[r][k] - mean_s[k]);
      var_m[k] += sq(cm[r][k] - mean_m[k]);
    }
    var_s[k] /= reps - 1;
    var_m[k] /= reps - 1;

    const double target = static_cast<double>(m) * probs[k];
    const double se_s = std::sqrt(var_s[k] / reps);
    const double se_m = std::sqrt(var_m[k] / reps);
    CHECK(std::fabs(mean_s[k] - target) <= 3.0 * se_s);
    CHECK(std::fabs(mean_m[k] - target) <= 3.0 * se_m);
    CHECK(var_s[k] <= var_m[k]);
  }
}
