#pragma once

#include "pfmc/model.hpp"

namespace pfmc {

/// Dynamic binomial model: y_t ~ Bin(m, logistic(x_t)) with the AR(1)
/// state of Ar1Model. Parameters (mu, phi, tau2); the trial count m is a
/// fixed design constant, not an estimated parameter. The log observation
/// density is concave in x, so the model supports partial adaptation; the
/// Newton mode search starts at logit(y/m) when m is large.
class BinomialArModel : public Model {
 public:
  explicit BinomialArModel(long trials);

  long trials() const { return m_; }

  PriorSpec default_prior() const override;
  std::vector<double> default_theta() const override { return {0.0, 0.97, 0.25}; }

  State sample_initial(std::span<const double> theta, RandomStream& rs) const override;
  GaussianLaw transition_law(const State& prev, std::span<const double> theta,
                             std::optional<double> y_prev, RandomStream& rs) const override;
  double log_obs(double y, const State& x, std::span<const double> theta) const override;
  double sample_obs(const State& x, std::span<const double> theta,
                    RandomStream& rs) const override;
  ObsCurvature obs_curvature(double y, double x,
                             std::span<const double> theta) const override;
  double newton_start(double y, const GaussianLaw& law,
                      std::span<const double> theta) const override;

 private:
  long m_;
};

}  // namespace pfmc
