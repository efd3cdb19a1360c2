#pragma once

#include <span>

namespace pfmc {

/// Exact log likelihood of the AR(1)-plus-noise model by the scalar Kalman
/// prediction/update recursions with stationary initialization. Throws
/// ConfigError when |phi| >= 1.
double kalman_loglik(double mu, double phi, double tau2, double sigma2,
                     std::span<const double> y);

/// Overload taking the Ar1Model parameter ordering (mu, phi, tau2, sigma2).
double kalman_loglik(std::span<const double> theta, std::span<const double> y);

}  // namespace pfmc
