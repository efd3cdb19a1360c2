#pragma once

#include "pfmc/model.hpp"

namespace pfmc {

/// Stochastic volatility with optional leverage and outliers:
///   y_t = K_t exp(x_t/2) eps_t,  x_{t+1} = mu + phi (x_t - mu) + sd(tau2) eta_t
/// with corr(eps_t, eta_t) = rho, Pr(K_t = 2.5) = omega. Parameters
/// (mu, phi, tau2[, rho][, omega]); rho is present only with leverage and
/// omega is a fixed design constant unless estimate_omega is set.
///
/// The observation density is the analytic two-point scale mixture. With
/// leverage active, the filter-side transition law conditions on the
/// standardized shock eps_t = y_t exp(-x_t/2) / K_t, drawing K_t per
/// particle with probability omega; data simulation uses the exact joint
/// draw of (eps_t, K_t, eta_t) instead.
class SvModel : public Model {
 public:
  SvModel(bool leverage, bool outliers, double omega = 0.03, bool estimate_omega = false);

  bool leverage() const { return leverage_; }
  bool outliers() const { return outliers_; }

  PriorSpec default_prior() const override;
  std::vector<double> default_theta() const override;

  State sample_initial(std::span<const double> theta, RandomStream& rs) const override;
  GaussianLaw transition_law(const State& prev, std::span<const double> theta,
                             std::optional<double> y_prev, RandomStream& rs) const override;
  double log_obs(double y, const State& x, std::span<const double> theta) const override;
  double sample_obs(const State& x, std::span<const double> theta,
                    RandomStream& rs) const override;
  ObsCurvature obs_curvature(double y, double x,
                             std::span<const double> theta) const override;
  Dataset simulate(std::span<const double> theta, std::size_t T,
                   RandomStream& rs) const override;

  static constexpr double kOutlierScale = 2.5;

 private:
  double omega_of(std::span<const double> theta) const;
  double rho_of(std::span<const double> theta) const;

  bool leverage_;
  bool outliers_;
  double fixed_omega_;
  bool estimate_omega_;
  int rho_index_ = -1;
  int omega_index_ = -1;
};

}  // namespace pfmc
