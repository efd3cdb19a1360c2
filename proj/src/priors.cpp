#include "pfmc/priors.hpp"

#include <cmath>

#include "pfmc/errors.hpp"
#include "pfmc/mathutil.hpp"

namespace pfmc {
namespace prior {

namespace {

// Marsaglia-Tsang; shape < 1 handled by the boost Gamma(a+1) * U^{1/a}.
double sample_gamma(double shape, RandomStream& rs) {
  if (shape < 1.0) {
    const double u = rs.uniform();
    return sample_gamma(shape + 1.0, rs) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rs.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rs.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

}  // namespace

double log_pdf(const Marginal& m, double x) {
  return std::visit(
      [x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return normal_logpdf(x, p.mean, p.var);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (x < p.lo || x > p.hi) return kNegInf;
          return -std::log(p.hi - p.lo);
        } else if constexpr (std::is_same_v<T, InverseGamma>) {
          if (!(x > 0.0)) return kNegInf;
          return p.shape * std::log(p.scale) - std::lgamma(p.shape) -
                 (p.shape + 1.0) * std::log(x) - p.scale / x;
        } else if constexpr (std::is_same_v<T, HalfNormal>) {
          if (x < 0.0) return kNegInf;
          return std::log(2.0) - 0.5 * (kLogTwoPi + std::log(p.var)) - 0.5 * x * x / p.var;
        } else {
          static_assert(std::is_same_v<T, TruncatedNormal>);
          if (x < p.lo || x > p.hi) return kNegInf;
          const double za = (p.lo - p.loc) / p.scale;
          const double zb = (p.hi - p.loc) / p.scale;
          return normal_logpdf(x, p.loc, p.scale * p.scale) -
                 std::log(norm_cdf(zb) - norm_cdf(za));
        }
      },
      m);
}

double sample(const Marginal& m, RandomStream& rs) {
  return std::visit(
      [&rs](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return p.mean + std::sqrt(p.var) * norm_ppf(rs.uniform());
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return p.lo + (p.hi - p.lo) * rs.uniform();
        } else if constexpr (std::is_same_v<T, InverseGamma>) {
          return p.scale / sample_gamma(p.shape, rs);
        } else if constexpr (std::is_same_v<T, HalfNormal>) {
          return std::sqrt(p.var) * norm_ppf(0.5 * (1.0 + rs.uniform()));
        } else {
          static_assert(std::is_same_v<T, TruncatedNormal>);
          // Rejection-free CDF inversion.
          const double fa = norm_cdf((p.lo - p.loc) / p.scale);
          const double fb = norm_cdf((p.hi - p.loc) / p.scale);
          return p.loc + p.scale * norm_ppf(fa + rs.uniform() * (fb - fa));
        }
      },
      m);
}

}  // namespace prior

double PriorSpec::log_pdf(std::span<const double> theta) const {
  if (theta.size() != marginals.size()) throw ConfigError("log_prior: dimension mismatch");
  double lp = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    lp += prior::log_pdf(marginals[i], theta[i]);
    if (lp == kNegInf) return kNegInf;
  }
  if (joint && !joint(theta)) return kNegInf;
  return lp + joint_log_norm;
}

bool PriorSpec::in_support(std::span<const double> theta) const {
  return log_pdf(theta) > kNegInf;
}

std::vector<double> PriorSpec::sample(RandomStream& rs) const {
  std::vector<double> theta(marginals.size());
  for (int tries = 0; tries < 100000; ++tries) {
    for (std::size_t i = 0; i < marginals.size(); ++i)
      theta[i] = prior::sample(marginals[i], rs);
    if (!joint || joint(theta)) return theta;
  }
  throw ConfigError("prior sampling: joint constraint rejected 100000 consecutive draws");
}

}  // namespace pfmc
