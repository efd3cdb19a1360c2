#include <doctest.h>

#include <cmath>

#include "pfmc/mathutil.hpp"
#include "pfmc/model.hpp"
#include "pfmc/models/garch.hpp"
#include "pfmc/models/sv.hpp"

using namespace pfmc;

namespace {

template <typename F>
double integrate(F f, double lo, double hi, int n = 20000) {
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("ar1 stationary variance of simulated states") {
  const auto model = make_model("ar1");
  // With sigma2 -> 0 the observations trace the states exactly.
  const std::vector<double> theta = {1.0, 0.8, 0.5, 1e-12};
  RandomStream rs(21, 0);
  const Dataset ds = model->simulate(theta, 100000, rs);
  const double target = 0.5 / (1.0 - 0.64);
  CHECK(sample_variance(ds.y) == doctest::Approx(target).epsilon(0.05));
  CHECK(mean(ds.y) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("ar1 with zero state noise pins the state at mu") {
  const auto model = make_model("ar1");
  const std::vector<double> theta = {5.0, 0.6, 0.0, 0.04};
  RandomStream rs(22, 0);
  const Dataset ds = model->simulate(theta, 2000, rs);
  CHECK(mean(ds.y) == doctest::Approx(5.0).epsilon(0.01));
  CHECK(sample_sd(ds.y) == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("binomial with frozen state at mu=0 gives Bin(m, 1/2)") {
  const auto model = make_model("binomial", 100);
  const std::vector<double> theta = {0.0, 0.6, 0.0};
  RandomStream rs(23, 0);
  const Dataset ds = model->simulate(theta, 4000, rs);
  std::vector<double> frac(ds.y.size());
  for (std::size_t i = 0; i < ds.y.size(); ++i) frac[i] = ds.y[i] / 100.0;
  const double se = sample_sd(frac) / std::sqrt(static_cast<double>(frac.size()));
  CHECK(std::fabs(mean(frac) - 0.5) <= 3.0 * se);
}

TEST_CASE("sv observation density is the analytic two-point mixture") {
  const SvModel plain(false, false);
  const SvModel outlier(false, true, 0.03);
  const std::vector<double> theta = {-0.3, 0.95, 0.04};
  const State x{0.7, 0.0};
  for (double y : {-2.0, -0.1, 0.0, 0.4, 3.5}) {
    const double base = normal_logpdf(y, 0.0, std::exp(0.7));
    CHECK(plain.log_obs(y, x, theta) == doctest::Approx(base).epsilon(1e-13));
    const double mixed = log_add_exp(
        std::log(0.03) + normal_logpdf(y, 0.0, 6.25 * std::exp(0.7)),
        std::log(0.97) + base);
    CHECK(outlier.log_obs(y, x, theta) == doctest::Approx(mixed).epsilon(1e-13));
  }
}

TEST_CASE("sv simulate with omega=0 never inflates scale") {
  // At tau2 ~ 0 and mu fixed, y_t ~ N(0, e^mu): the absolute values should
  // be consistent with scale e^{mu/2} and never the 2.5x outlier scale.
  const auto model = make_model("sv");
  const std::vector<double> theta = {0.0, 0.5, 1e-12};
  RandomStream rs(24, 0);
  const Dataset ds = model->simulate(theta, 20000, rs);
  CHECK(sample_variance(ds.y) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sv leverage transition law conditions on the observation shock") {
  const SvModel lev(true, false);
  const std::vector<double> theta = {0.1, 0.9, 0.25, -0.6};
  RandomStream rs(25, 0);
  const State x{0.4, 0.0};
  const double y_prev = 1.3;
  const GaussianLaw law = lev.transition_law(x, theta, y_prev, rs);
  const double eps = y_prev * std::exp(-0.2);
  CHECK(law.mean == doctest::Approx(0.1 + 0.9 * 0.3 + 0.5 * (-0.6) * eps).epsilon(1e-12));
  CHECK(law.var == doctest::Approx(0.25 * (1.0 - 0.36)).epsilon(1e-12));
  // Without a previous observation the plain AR law applies.
  const GaussianLaw law0 = lev.transition_law(x, theta, std::nullopt, rs);
  CHECK(law0.mean == doctest::Approx(0.1 + 0.9 * 0.3).epsilon(1e-12));
  CHECK(law0.var == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("sv leverage simulation shows the right shock correlation") {
  // mu = 0, tiny tau2 keeps x almost constant at 0, so eps_t ~ y_t and
  // x_{t+1} - phi x_t ~ sd * (rho eps_t + ...); with phi = 0 and var 1 the
  // lag-0 correlation of y_t with x_{t+1} is rho * sd. Use moderate values
  // and check the sample covariance sign and magnitude.
  const auto model = make_model("sv-lev");
  const std::vector<double> theta = {0.0, 0.0, 0.09, -0.7};
  RandomStream rs(26, 0);
  const Dataset ds = model->simulate(theta, 60000, rs);
  // cov(y_t, y_{t+1}^2) < 0 under negative leverage (volatility feedback).
  double acc = 0.0;
  for (std::size_t t = 0; t + 1 < ds.y.size(); ++t)
    acc += ds.y[t] * (ds.y[t + 1] * ds.y[t + 1] - 1.0);
  acc /= static_cast<double>(ds.y.size() - 1);
  CHECK(acc < 0.0);
}

TEST_CASE("garch initial law and variance recursion") {
  const GarchModel model;
  const std::vector<double> theta = {0.1, 0.2, 0.3, 0.5};
  RandomStream rs(27, 0);
  const State x0 = model.sample_initial(theta, rs);
  CHECK(x0.aux == doctest::Approx(0.2 / (1.0 - 0.8)).epsilon(1e-12));
  const State prev{1.5, 0.7};
  const GaussianLaw law = model.transition_law(prev, theta, std::nullopt, rs);
  const double expected = 0.2 + 0.3 * 2.25 + 0.5 * 0.7;
  CHECK(law.mean == doctest::Approx(0.0));
  CHECK(law.var == doctest::Approx(expected).epsilon(1e-12));
  const State next = model.advance(prev, -0.3, theta);
  CHECK(next.x == doctest::Approx(-0.3));
  CHECK(next.aux == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("observation densities integrate to one") {
  const auto ar1 = make_model("ar1");
  const std::vector<double> th_ar1 = {0.0, 0.6, 1.0, 0.5};
  CHECK(integrate([&](double y) {
          return std::exp(ar1->log_obs(y, State{0.3, 0.0}, th_ar1));
        }, -10.0, 10.0) == doctest::Approx(1.0).epsilon(1e-8));

  const auto sv = make_model("sv-out");
  const std::vector<double> th_sv = {0.0, 0.9, 0.1};
  CHECK(integrate([&](double y) {
          return std::exp(sv->log_obs(y, State{0.5, 0.0}, th_sv));
        }, -45.0, 45.0) == doctest::Approx(1.0).epsilon(1e-8));

  const auto binom = make_model("binomial", 50);
  const std::vector<double> th_b = {0.0, 0.9, 0.1};
  double total = 0.0;
  for (int y = 0; y <= 50; ++y)
    total += std::exp(binom->log_obs(y, State{0.4, 0.0}, th_b));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transition samples match the law they report") {
  const auto garch = make_model("garch");
  const std::vector<double> theta = {0.1, 0.2, 0.3, 0.5};
  const State prev{1.0, 0.9};
  RandomStream law_rs(28, 0);
  const GaussianLaw law = garch->transition_law(prev, theta, std::nullopt, law_rs);
  RandomStream rs(28, 1);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const State next = sample_transition(*garch, prev, theta, std::nullopt, rs);
    sum += next.x;
    sum2 += next.x * next.x;
  }
  const double m = sum / n;
  const double v = sum2 / n - m * m;
  CHECK(std::fabs(m - law.mean) < 4.0 * std::sqrt(law.var / n));
  CHECK(v == doctest::Approx(law.var).epsilon(0.03));
}

TEST_CASE("unknown model name raises ConfigError") {
  CHECK_THROWS_AS(make_model("arima"), ConfigError);
}
