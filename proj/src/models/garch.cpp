#include "pfmc/models/garch.hpp"

#include <cmath>

#include "pfmc/mathutil.hpp"

namespace pfmc {

namespace {
enum { kTau2, kAlpha, kBeta, kGamma };

double next_sigma2(const State& prev, std::span<const double> theta) {
  return theta[kAlpha] + theta[kBeta] * sq(prev.x) + theta[kGamma] * prev.aux;
}
}  // namespace

GarchModel::GarchModel() {
  info_.name = "garch";
  info_.params = {{"tau2", Transform::Log},
                  {"alpha", Transform::Log},
                  {"beta", Transform::Logit},
                  {"gamma", Transform::Logit}};
  info_.partially_adaptable = true;
}

PriorSpec GarchModel::default_prior() const {
  PriorSpec p;
  p.marginals = {prior::HalfNormal{100.0}, prior::HalfNormal{100.0},
                 prior::Uniform{0.0, 1.0}, prior::Uniform{0.0, 1.0}};
  p.joint = [](std::span<const double> theta) {
    return theta[kBeta] > 0.0 && theta[kGamma] > 0.0 &&
           theta[kBeta] + theta[kGamma] < 1.0;
  };
  // The (beta, gamma) triangle has area 1/2 under the unit-box marginals.
  p.joint_log_norm = std::log(2.0);
  p.joint_desc = "beta > 0, gamma > 0, beta + gamma < 1";
  return p;
}

State GarchModel::sample_initial(std::span<const double> theta, RandomStream& rs) const {
  const double s2 = theta[kAlpha] / (1.0 - theta[kBeta] - theta[kGamma]);
  return State{std::sqrt(s2) * rs.normal(), s2};
}

GaussianLaw GarchModel::transition_law(const State& prev, std::span<const double> theta,
                                       std::optional<double>, RandomStream&) const {
  return {0.0, next_sigma2(prev, theta)};
}

State GarchModel::advance(const State& prev, double x_new,
                          std::span<const double> theta) const {
  return State{x_new, next_sigma2(prev, theta)};
}

double GarchModel::log_obs(double y, const State& x, std::span<const double> theta) const {
  return normal_logpdf(y, x.x, theta[kTau2]);
}

double GarchModel::sample_obs(const State& x, std::span<const double> theta,
                              RandomStream& rs) const {
  return x.x + std::sqrt(theta[kTau2]) * rs.normal();
}

ObsCurvature GarchModel::obs_curvature(double y, double x,
                                       std::span<const double> theta) const {
  const double v = theta[kTau2];
  return {normal_logpdf(y, x, v), (y - x) / v, -1.0 / v};
}

std::optional<GaussianObs> GarchModel::gaussian_obs(std::span<const double> theta) const {
  return GaussianObs{1.0, theta[kTau2]};
}

}  // namespace pfmc
