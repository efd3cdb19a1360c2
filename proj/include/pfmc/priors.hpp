#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pfmc/random.hpp"

namespace pfmc {

namespace prior {

// N(a, b^2): mean a, variance var = b^2.
struct Normal {
  double mean, var;
};
struct Uniform {
  double lo, hi;
};
// IG(a, b): density b^a / Gamma(a) * x^{-a-1} * exp(-b/x), mode b/(a+1).
struct InverseGamma {
  double shape, scale;
};
// HN(b^2): half-normal on [0, inf) with scale b.
struct HalfNormal {
  double var;
};
// TN_{(lo,hi)}(loc, scale): normal(loc, scale^2) truncated to (lo, hi).
struct TruncatedNormal {
  double loc, scale, lo, hi;
};

using Marginal = std::variant<Normal, Uniform, InverseGamma, HalfNormal, TruncatedNormal>;

double log_pdf(const Marginal& m, double x);
double sample(const Marginal& m, RandomStream& rs);

}  // namespace prior

/// Product of per-parameter marginals plus an optional joint region
/// constraint (e.g. the GARCH stationarity triangle). `joint_log_norm`
/// corrects the normalization when the constraint truncates the product
/// measure, so evidence values remain comparable across models.
struct PriorSpec {
  std::vector<prior::Marginal> marginals;
  std::function<bool(std::span<const double>)> joint;
  double joint_log_norm = 0.0;
  std::string joint_desc;

  double log_pdf(std::span<const double> theta) const;
  bool in_support(std::span<const double> theta) const;
  /// Inverse-CDF draws per marginal; joint constraint enforced by rejection.
  std::vector<double> sample(RandomStream& rs) const;
};

}  // namespace pfmc
