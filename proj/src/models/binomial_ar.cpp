#include "pfmc/models/binomial_ar.hpp"

#include <cmath>

#include "pfmc/mathutil.hpp"

namespace pfmc {

namespace {
enum { kMu, kPhi, kTau2 };
}

BinomialArModel::BinomialArModel(long trials) : m_(trials) {
  if (trials < 1) throw ConfigError("binomial model requires at least one trial");
  info_.name = "binomial";
  info_.params = {{"mu", Transform::Identity},
                  {"phi", Transform::Logit},
                  {"tau2", Transform::Log}};
  info_.partially_adaptable = true;
  info_.integer_obs = true;
}

PriorSpec BinomialArModel::default_prior() const {
  PriorSpec p;
  p.marginals = {prior::Normal{0.0, 100.0}, prior::Uniform{0.0, 1.0},
                 prior::HalfNormal{100.0}};
  return p;
}

State BinomialArModel::sample_initial(std::span<const double> theta,
                                      RandomStream& rs) const {
  const double sd = std::sqrt(theta[kTau2] / (1.0 - sq(theta[kPhi])));
  return State{theta[kMu] + sd * rs.normal(), 0.0};
}

GaussianLaw BinomialArModel::transition_law(const State& prev, std::span<const double> theta,
                                            std::optional<double>, RandomStream&) const {
  return {theta[kMu] + theta[kPhi] * (prev.x - theta[kMu]), theta[kTau2]};
}

double BinomialArModel::log_obs(double y, const State& x, std::span<const double>) const {
  const double m = static_cast<double>(m_);
  if (y < 0.0 || y > m || y != std::floor(y)) return kNegInf;
  const double lchoose =
      std::lgamma(m + 1.0) - std::lgamma(y + 1.0) - std::lgamma(m - y + 1.0);
  return lchoose + y * x.x - m * softplus(x.x);
}

double BinomialArModel::sample_obs(const State& x, std::span<const double>,
                                   RandomStream& rs) const {
  const double p = logistic(x.x);
  long count = 0;
  for (long i = 0; i < m_; ++i)
    if (rs.uniform() < p) ++count;
  return static_cast<double>(count);
}

ObsCurvature BinomialArModel::obs_curvature(double y, double x,
                                            std::span<const double> theta) const {
  const double m = static_cast<double>(m_);
  const double p = logistic(x);
  return {log_obs(y, State{x, 0.0}, theta), y - m * p, -m * p * (1.0 - p)};
}

double BinomialArModel::newton_start(double y, const GaussianLaw& law,
                                     std::span<const double>) const {
  const double m = static_cast<double>(m_);
  if (m_ >= 50 && y > 0.0 && y < m) return logit(y / m);
  return law.mean;
}

}  // namespace pfmc
