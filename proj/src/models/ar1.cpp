#include "pfmc/models/ar1.hpp"

#include "pfmc/mathutil.hpp"

namespace pfmc {

namespace {
enum { kMu, kPhi, kTau2, kSigma2 };
}

Ar1Model::Ar1Model() {
  info_.name = "ar1";
  info_.params = {{"mu", Transform::Identity},
                  {"phi", Transform::Logit},
                  {"tau2", Transform::Log},
                  {"sigma2", Transform::Log}};
  info_.partially_adaptable = true;
}

PriorSpec Ar1Model::default_prior() const {
  PriorSpec p;
  p.marginals = {prior::Normal{0.0, 100.0}, prior::Uniform{0.0, 1.0},
                 prior::InverseGamma{0.1, 0.1}, prior::InverseGamma{0.1, 0.1}};
  return p;
}

State Ar1Model::sample_initial(std::span<const double> theta, RandomStream& rs) const {
  const double sd = std::sqrt(theta[kTau2] / (1.0 - sq(theta[kPhi])));
  return State{theta[kMu] + sd * rs.normal(), 0.0};
}

GaussianLaw Ar1Model::transition_law(const State& prev, std::span<const double> theta,
                                     std::optional<double>, RandomStream&) const {
  return {theta[kMu] + theta[kPhi] * (prev.x - theta[kMu]), theta[kTau2]};
}

double Ar1Model::log_obs(double y, const State& x, std::span<const double> theta) const {
  return normal_logpdf(y, x.x, theta[kSigma2]);
}

double Ar1Model::sample_obs(const State& x, std::span<const double> theta,
                            RandomStream& rs) const {
  return x.x + std::sqrt(theta[kSigma2]) * rs.normal();
}

ObsCurvature Ar1Model::obs_curvature(double y, double x,
                                     std::span<const double> theta) const {
  const double v = theta[kSigma2];
  return {normal_logpdf(y, x, v), (y - x) / v, -1.0 / v};
}

std::optional<GaussianObs> Ar1Model::gaussian_obs(std::span<const double> theta) const {
  return GaussianObs{1.0, theta[kSigma2]};
}

}  // namespace pfmc
