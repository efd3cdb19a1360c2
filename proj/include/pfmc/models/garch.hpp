#pragma once

#include "pfmc/model.hpp"

namespace pfmc {

/// GARCH(1,1) observed with Gaussian noise:
///   y_t | x_t ~ N(x_t, tau2)
///   x_{t+1} | sigma2_{t+1} ~ N(0, sigma2_{t+1}),
///   sigma2_{t+1} = alpha + beta x_t^2 + gamma sigma2_t,
///   x_0 ~ N(0, alpha / (1 - beta - gamma)).
/// Parameters (tau2, alpha, beta, gamma) with the stationarity region
/// beta > 0, gamma > 0, beta + gamma < 1. The conditional variance rides
/// along in State::aux, so the transition law is a deterministic function
/// of the previous particle. Gaussian observations make the model exactly
/// adaptable.
class GarchModel : public Model {
 public:
  GarchModel();

  PriorSpec default_prior() const override;
  std::vector<double> default_theta() const override {
    return {2.7e-4, 4.95e-5, 0.89, 0.04};
  }

  State sample_initial(std::span<const double> theta, RandomStream& rs) const override;
  GaussianLaw transition_law(const State& prev, std::span<const double> theta,
                             std::optional<double> y_prev, RandomStream& rs) const override;
  State advance(const State& prev, double x_new,
                std::span<const double> theta) const override;
  double log_obs(double y, const State& x, std::span<const double> theta) const override;
  double sample_obs(const State& x, std::span<const double> theta,
                    RandomStream& rs) const override;
  ObsCurvature obs_curvature(double y, double x,
                             std::span<const double> theta) const override;
  std::optional<GaussianObs> gaussian_obs(std::span<const double> theta) const override;
};

}  // namespace pfmc
