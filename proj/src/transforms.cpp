#include "pfmc/transforms.hpp"

#include <cmath>

#include "pfmc/mathutil.hpp"

namespace pfmc {

double to_unconstrained(Transform t, double natural) {
  switch (t) {
    case Transform::Identity:
      return natural;
    case Transform::Log:
      if (!(natural > 0.0)) throw TransformError("log transform requires a positive value");
      return std::log(natural);
    case Transform::Logit:
      if (!(natural > 0.0 && natural < 1.0))
        throw TransformError("logit transform requires a value in (0,1)");
      return logit(natural);
    case Transform::FisherZ:
      if (!(natural > -1.0 && natural < 1.0))
        throw TransformError("Fisher-z transform requires a value in (-1,1)");
      return std::atanh(natural);
  }
  throw TransformError("unknown transform");
}

double from_unconstrained(Transform t, double z) {
  switch (t) {
    case Transform::Identity:
      return z;
    case Transform::Log:
      return std::exp(z);
    case Transform::Logit:
      return logistic(z);
    case Transform::FisherZ:
      return std::tanh(z);
  }
  throw TransformError("unknown transform");
}

double log_jacobian(Transform t, double natural) {
  switch (t) {
    case Transform::Identity:
      return 0.0;
    case Transform::Log:
      return std::log(natural);
    case Transform::Logit:
      return std::log(natural) + std::log1p(-natural);
    case Transform::FisherZ:
      return std::log1p(-natural * natural);
  }
  throw TransformError("unknown transform");
}

ParameterVector pack_natural(std::span<const Transform> transforms,
                             std::span<const double> natural) {
  if (transforms.size() != natural.size())
    throw ConfigError("pack_natural: dimension mismatch");
  ParameterVector pv;
  pv.natural.assign(natural.begin(), natural.end());
  pv.z.resize(natural.size());
  for (std::size_t i = 0; i < natural.size(); ++i) {
    pv.z[i] = to_unconstrained(transforms[i], natural[i]);
    pv.log_jac += log_jacobian(transforms[i], natural[i]);
  }
  return pv;
}

ParameterVector pack_unconstrained(std::span<const Transform> transforms,
                                   std::span<const double> z) {
  if (transforms.size() != z.size())
    throw ConfigError("pack_unconstrained: dimension mismatch");
  ParameterVector pv;
  pv.z.assign(z.begin(), z.end());
  pv.natural.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    pv.natural[i] = from_unconstrained(transforms[i], z[i]);
    pv.log_jac += log_jacobian(transforms[i], pv.natural[i]);
  }
  return pv;
}

}  // namespace pfmc
