#include <doctest.h>

#include <cmath>

#include "pfmc/diagnostics.hpp"
#include "pfmc/mathutil.hpp"

using namespace pfmc;

namespace {

std::vector<double> ar1_series(std::size_t n, double rho, std::uint64_t stream) {
  RandomStream rs(111, stream);
  std::vector<double> x(n);
  x[0] = rs.normal();
  const double innov = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 1; i < n; ++i) x[i] = rho * x[i - 1] + innov * rs.normal();
  return x;
}

}  // namespace

TEST_CASE("iid series has IF near one") {
  const auto x = ar1_series(50000, 0.0, 1);
  const double f = inefficiency(x);
  CHECK(f >= 0.9);
  CHECK(f <= 1.2);
}

TEST_CASE("ar(1) series matches the (1+rho)/(1-rho) oracle") {
  const auto x = ar1_series(50000, 0.5, 2);
  const double f = inefficiency(x);
  CHECK(f == doctest::Approx(3.0).epsilon(0.5 / 3.0));
}

TEST_CASE("first lag below threshold is still included in the sum") {
  const auto x = ar1_series(50000, 0.0, 3);
  const std::size_t n = x.size();
  const double m = mean(x);
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) c0 += sq(x[i] - m);
  for (std::size_t i = 1; i < n; ++i) c1 += (x[i] - m) * (x[i - 1] - m);
  const double rho1 = c1 / c0;  // both normalized by 1/K
  REQUIRE(std::fabs(rho1) < 2.0 / std::sqrt(static_cast<double>(n)));
  CHECK(inefficiency(x) == doctest::Approx(std::max(1.0, 1.0 + 2.0 * rho1)).epsilon(1e-12));
}

TEST_CASE("constant series reports the infinity sentinel") {
  const std::vector<double> x(500, 1.25);
  CHECK(std::isinf(inefficiency(x)));
}

TEST_CASE("short series is rejected") {
  const std::vector<double> x(50, 0.0);
  CHECK_THROWS_AS(inefficiency(x), ConfigError);
}

TEST_CASE("inefficiency is invariant to affine transforms") {
  const auto x = ar1_series(20000, 0.4, 4);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = -3.7 * x[i] + 11.0;
  CHECK(inefficiency(y) == doctest::Approx(inefficiency(x)).epsilon(1e-10));
}

TEST_CASE("equivalent computing time") {
  CHECK(ect_seconds(1.0, 1.0) == doctest::Approx(1000.0));
  // Sampler-comparison consistency: IF 25.47 at 0.5286 s/iteration.
  const double v = ect_seconds(25.47, 0.5286);
  CHECK(v == doctest::Approx(25.47 * 0.5286 * 1000.0).epsilon(1e-15));
  CHECK(std::fabs(v - 13463.7) < 1.0);
  CHECK(ect_seconds(2.0, 0.5) == doctest::Approx(2.0 * ect_seconds(1.0, 0.5)));
  CHECK(ect_seconds(2.0, 0.5) == doctest::Approx(0.5 * ect_seconds(2.0, 1.0)));
  CHECK_THROWS_AS(ect_seconds(0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(ect_seconds(1.0, 0.0), ConfigError);
}

TEST_CASE("acceptance rate over the post-burn window") {
  std::vector<char> all(200, 1);
  CHECK(acceptance_rate_pct(all, 0) == doctest::Approx(100.0));
  std::vector<char> alt(200);
  for (int i = 0; i < 200; ++i) alt[i] = i % 2;
  CHECK(acceptance_rate_pct(alt, 0) == doctest::Approx(50.0));
  // Burn-in excludes the all-rejected prefix.
  std::vector<char> mixed(100, 0);
  mixed.insert(mixed.end(), 100, 1);
  CHECK(acceptance_rate_pct(mixed, 100) == doctest::Approx(100.0));
}

TEST_CASE("sd study: exact cell has zero spread, sir spread scales as 1/sqrt(M)") {
  const auto model = make_model("ar1");
  const std::vector<double> theta = {0.0, 0.6, 1.0, 1.0};
  std::vector<Dataset> datasets;
  for (int d = 0; d < 2; ++d) {
    RandomStream rs(112, d);
    datasets.push_back(model->simulate(theta, 50, rs));
    datasets.back().meta["stream_tag"] = d;
  }

  std::vector<SdStudyCell> cells(3);
  cells[0].label = "kalman";
  cells[0].lik.exact_kalman = true;
  cells[1].label = "sir-100";
  cells[1].lik.filter.variant = FilterVariant::Sir;
  cells[1].lik.filter.n_particles = 100;
  cells[2].label = "sir-400";
  cells[2].lik.filter.variant = FilterVariant::Sir;
  cells[2].lik.filter.n_particles = 400;

  const auto report = loglik_sd_study(*model, theta, datasets, cells, 150, 113, 1);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].median_of_sds == 0.0);  // deterministic likelihood
  CHECK(report.rows[0].iqr_of_sds == 0.0);
  const double ratio = report.rows[1].median_of_sds / report.rows[2].median_of_sds;
  INFO("sd ratio M=100 / M=400: ", ratio);
  CHECK(ratio > 2.0 / 1.5);
  CHECK(ratio < 2.0 * 1.5);

  // Dataset order does not matter.
  std::vector<Dataset> reversed = {datasets[1], datasets[0]};
  const auto report2 = loglik_sd_study(*model, theta, reversed, cells, 150, 113, 1);
  for (std::size_t r = 0; r < report.rows.size(); ++r)
    CHECK(report2.rows[r].median_of_sds == doctest::Approx(report.rows[r].median_of_sds));
}
