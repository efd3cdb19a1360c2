#include "pfmc/models/sv.hpp"

#include <cmath>

#include "pfmc/mathutil.hpp"

namespace pfmc {

namespace {
enum { kMu, kPhi, kTau2 };

// log N(y; 0, s2 * e^x) and derivatives in x.
double comp_logpdf(double y, double x, double s2) {
  return -0.5 * (kLogTwoPi + std::log(s2) + x + y * y * std::exp(-x) / s2);
}
double comp_grad(double y, double x, double s2) {
  return -0.5 + 0.5 * y * y * std::exp(-x) / s2;
}
double comp_hess(double y, double x, double s2) {
  return -0.5 * y * y * std::exp(-x) / s2;
}
}  // namespace

SvModel::SvModel(bool leverage, bool outliers, double omega, bool estimate_omega)
    : leverage_(leverage),
      outliers_(outliers),
      fixed_omega_(outliers ? omega : 0.0),
      estimate_omega_(outliers && estimate_omega) {
  if (outliers && !(omega >= 0.0 && omega < 1.0))
    throw ConfigError("sv outlier probability must lie in [0,1)");
  info_.name = std::string("sv") + (leverage ? "-lev" : "") + (outliers ? "-out" : "");
  info_.params = {{"mu", Transform::Identity},
                  {"phi", Transform::Logit},
                  {"tau2", Transform::Log}};
  if (leverage_) {
    rho_index_ = static_cast<int>(info_.params.size());
    info_.params.push_back({"rho", Transform::FisherZ});
  }
  if (estimate_omega_) {
    omega_index_ = static_cast<int>(info_.params.size());
    info_.params.push_back({"omega", Transform::Logit});
  }
  info_.partially_adaptable = true;
}

double SvModel::omega_of(std::span<const double> theta) const {
  if (!outliers_) return 0.0;
  return estimate_omega_ ? theta[omega_index_] : fixed_omega_;
}

double SvModel::rho_of(std::span<const double> theta) const {
  return leverage_ ? theta[rho_index_] : 0.0;
}

PriorSpec SvModel::default_prior() const {
  PriorSpec p;
  p.marginals = {prior::Normal{0.0, 100.0},
                 prior::TruncatedNormal{0.9, 0.1, 0.0, 1.0},
                 prior::InverseGamma{0.01, 0.01}};
  if (leverage_) p.marginals.push_back(prior::TruncatedNormal{0.0, 1e6, -1.0, 1.0});
  if (estimate_omega_) p.marginals.push_back(prior::Uniform{0.0, 1.0});
  return p;
}

std::vector<double> SvModel::default_theta() const {
  std::vector<double> t = {-0.5, 0.98, 0.01};
  if (leverage_) t.push_back(-0.75);
  if (estimate_omega_) t.push_back(fixed_omega_);
  return t;
}

State SvModel::sample_initial(std::span<const double> theta, RandomStream& rs) const {
  const double sd = std::sqrt(theta[kTau2] / (1.0 - sq(theta[kPhi])));
  return State{theta[kMu] + sd * rs.normal(), 0.0};
}

GaussianLaw SvModel::transition_law(const State& prev, std::span<const double> theta,
                                    std::optional<double> y_prev, RandomStream& rs) const {
  GaussianLaw law{theta[kMu] + theta[kPhi] * (prev.x - theta[kMu]), theta[kTau2]};
  const double rho = rho_of(theta);
  if (leverage_ && rho != 0.0 && y_prev) {
    double k = 1.0;
    if (outliers_ && rs.uniform() < omega_of(theta)) k = kOutlierScale;
    const double eps = *y_prev * std::exp(-0.5 * prev.x) / k;
    law.mean += std::sqrt(theta[kTau2]) * rho * eps;
    law.var = theta[kTau2] * (1.0 - rho * rho);
  }
  return law;
}

double SvModel::log_obs(double y, const State& x, std::span<const double> theta) const {
  const double omega = omega_of(theta);
  const double base = comp_logpdf(y, x.x, 1.0);
  if (omega == 0.0) return base;
  return log_add_exp(std::log(omega) + comp_logpdf(y, x.x, sq(kOutlierScale)),
                     std::log1p(-omega) + base);
}

double SvModel::sample_obs(const State& x, std::span<const double> theta,
                           RandomStream& rs) const {
  double k = 1.0;
  if (outliers_ && rs.uniform() < omega_of(theta)) k = kOutlierScale;
  return k * std::exp(0.5 * x.x) * rs.normal();
}

ObsCurvature SvModel::obs_curvature(double y, double x,
                                    std::span<const double> theta) const {
  const double omega = omega_of(theta);
  if (omega == 0.0)
    return {comp_logpdf(y, x, 1.0), comp_grad(y, x, 1.0), comp_hess(y, x, 1.0)};
  const double c2 = sq(kOutlierScale);
  const double la = std::log(omega) + comp_logpdf(y, x, c2);
  const double lb = std::log1p(-omega) + comp_logpdf(y, x, 1.0);
  const double value = log_add_exp(la, lb);
  const double r = std::exp(la - value);
  const double ga = comp_grad(y, x, c2);
  const double gb = comp_grad(y, x, 1.0);
  const double grad = r * ga + (1.0 - r) * gb;
  const double hess = r * (comp_hess(y, x, c2) + ga * ga) +
                      (1.0 - r) * (comp_hess(y, x, 1.0) + gb * gb) - grad * grad;
  return {value, grad, hess};
}

Dataset SvModel::simulate(std::span<const double> theta, std::size_t T,
                          RandomStream& rs) const {
  if (T < 1) throw ConfigError("simulate: T must be at least 1");
  const double mu = theta[kMu];
  const double phi = theta[kPhi];
  const double sd = std::sqrt(theta[kTau2]);
  const double rho = rho_of(theta);
  const double omega = omega_of(theta);

  Dataset data;
  data.name = info_.name;
  data.y.reserve(T);
  for (std::size_t i = 0; i < n_params(); ++i)
    data.meta["theta." + info_.params[i].name] = theta[i];

  State s = sample_initial(theta, rs);
  double x = mu + phi * (s.x - mu) + sd * rs.normal();  // no y_0, plain first step
  for (std::size_t t = 1; t <= T; ++t) {
    const double k = (outliers_ && rs.uniform() < omega) ? kOutlierScale : 1.0;
    const double eps = rs.normal();
    data.y.push_back(k * std::exp(0.5 * x) * eps);
    if (t < T) {
      const double eta = rho * eps + std::sqrt(1.0 - rho * rho) * rs.normal();
      x = mu + phi * (x - mu) + sd * eta;
    }
  }
  return data;
}

}  // namespace pfmc
