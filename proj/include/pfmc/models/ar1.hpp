#pragma once

#include "pfmc/model.hpp"

namespace pfmc {

/// First-order autoregression observed with Gaussian noise:
///   y_t | x_t ~ N(x_t, sigma2)
///   x_{t+1} | x_t ~ N(mu + phi (x_t - mu), tau2),  x_0 stationary.
/// Parameters (mu, phi, tau2, sigma2). Exactly solvable by the Kalman
/// recursions, which makes it the reference model for filter checks.
class Ar1Model : public Model {
 public:
  Ar1Model();

  PriorSpec default_prior() const override;
  std::vector<double> default_theta() const override { return {0.0, 0.6, 1.0, 1.0}; }

  State sample_initial(std::span<const double> theta, RandomStream& rs) const override;
  GaussianLaw transition_law(const State& prev, std::span<const double> theta,
                             std::optional<double> y_prev, RandomStream& rs) const override;
  double log_obs(double y, const State& x, std::span<const double> theta) const override;
  double sample_obs(const State& x, std::span<const double> theta,
                    RandomStream& rs) const override;
  ObsCurvature obs_curvature(double y, double x,
                             std::span<const double> theta) const override;
  std::optional<GaussianObs> gaussian_obs(std::span<const double> theta) const override;
};

}  // namespace pfmc
