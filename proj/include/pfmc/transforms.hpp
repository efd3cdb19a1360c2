#pragma once

#include <span>
#include <string>
#include <vector>

#include "pfmc/errors.hpp"

namespace pfmc {

/// Map from a parameter's natural domain to the real line.
///   Identity : unbounded parameters
///   Log      : positive parameters (variances)
///   Logit    : parameters on (0,1) (autoregressive roots, probabilities)
///   FisherZ  : correlations on (-1,1)
enum class Transform { Identity, Log, Logit, FisherZ };

double to_unconstrained(Transform t, double natural);    // throws TransformError on boundary
double from_unconstrained(Transform t, double z);
/// log |d natural / d z| evaluated at the given natural value.
double log_jacobian(Transform t, double natural);

/// A parameter point in both coordinate systems, with the total log-Jacobian
/// of the natural-from-unconstrained map.
struct ParameterVector {
  std::vector<double> natural;
  std::vector<double> z;
  double log_jac = 0.0;
};

ParameterVector pack_natural(std::span<const Transform> transforms,
                             std::span<const double> natural);
ParameterVector pack_unconstrained(std::span<const Transform> transforms,
                                   std::span<const double> z);

}  // namespace pfmc
