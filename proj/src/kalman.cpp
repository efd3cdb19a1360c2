#include "pfmc/kalman.hpp"

#include <cmath>

#include "pfmc/errors.hpp"
#include "pfmc/mathutil.hpp"

namespace pfmc {

double kalman_loglik(double mu, double phi, double tau2, double sigma2,
                     std::span<const double> y) {
  if (!(std::fabs(phi) < 1.0))
    throw ConfigError("kalman_loglik: |phi| >= 1 has no stationary initialization");
  // x_1 is marginally stationary: N(mu, tau2 / (1 - phi^2)).
  double pm = mu;
  double pv = tau2 / (1.0 - phi * phi);
  double ll = 0.0;
  for (double yt : y) {
    const double s = pv + sigma2;
    ll += normal_logpdf(yt, pm, s);
    const double gain = pv / s;
    const double fm = pm + gain * (yt - pm);
    const double fv = pv * (1.0 - gain);
    pm = mu + phi * (fm - mu);
    pv = phi * phi * fv + tau2;
  }
  return ll;
}

double kalman_loglik(std::span<const double> theta, std::span<const double> y) {
  return kalman_loglik(theta[0], theta[1], theta[2], theta[3], y);
}

}  // namespace pfmc
