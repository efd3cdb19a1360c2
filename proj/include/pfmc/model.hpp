#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfmc/dataset.hpp"
#include "pfmc/errors.hpp"
#include "pfmc/priors.hpp"
#include "pfmc/random.hpp"
#include "pfmc/transforms.hpp"

namespace pfmc {

/// Latent state of one particle. `x` is the stochastic component; `aux`
/// carries any deterministic companion (the GARCH conditional variance).
struct State {
  double x = 0.0;
  double aux = 0.0;
};

/// Scalar Gaussian law N(mean, var).
struct GaussianLaw {
  double mean = 0.0;
  double var = 1.0;
};

/// Log observation density and its first two derivatives in the state.
struct ObsCurvature {
  double value = 0.0;
  double grad = 0.0;
  double hess = 0.0;
};

/// Gaussian observation equation y = coeff * x + N(0, var); models exposing
/// this are exactly adaptable by conjugacy.
struct GaussianObs {
  double coeff = 1.0;
  double var = 1.0;
};

struct ParamMeta {
  std::string name;
  Transform transform = Transform::Identity;
};

struct ModelInfo {
  std::string name;
  std::vector<ParamMeta> params;
  bool partially_adaptable = false;
  bool integer_obs = false;  // observations are counts
};

/// State-space model contract: initial law, Markov transition in the scalar
/// state component, and observation density. The transition is described by
/// a per-particle Gaussian law; models with observation feedback (leverage)
/// may consult the previous observation and draw auxiliary indicators from
/// the supplied stream while building the law, so a law must be built once
/// per particle and reused for both sampling and density evaluation.
class Model {
 public:
  virtual ~Model() = default;

  const ModelInfo& info() const { return info_; }
  std::size_t n_params() const { return info_.params.size(); }
  std::vector<Transform> transforms() const {
    std::vector<Transform> t;
    for (const auto& p : info_.params) t.push_back(p.transform);
    return t;
  }
  int param_index(const std::string& name) const;

  virtual PriorSpec default_prior() const = 0;
  virtual std::vector<double> default_theta() const = 0;

  virtual State sample_initial(std::span<const double> theta, RandomStream& rs) const = 0;
  virtual GaussianLaw transition_law(const State& prev, std::span<const double> theta,
                                     std::optional<double> y_prev, RandomStream& rs) const = 0;
  /// Attach the deterministic state component to a freshly-sampled x.
  virtual State advance(const State& prev, double x_new,
                        std::span<const double> theta) const {
    (void)prev;
    (void)theta;
    return State{x_new, 0.0};
  }

  virtual double log_obs(double y, const State& x, std::span<const double> theta) const = 0;
  virtual double sample_obs(const State& x, std::span<const double> theta,
                            RandomStream& rs) const = 0;

  /// Partial adaptation: log p(y|x) with derivatives in x.
  virtual ObsCurvature obs_curvature(double y, double x,
                                     std::span<const double> theta) const {
    (void)y;
    (void)x;
    (void)theta;
    throw UnsupportedVariant("model '" + info_.name + "' has no observation curvature");
  }
  virtual double newton_start(double y, const GaussianLaw& law,
                              std::span<const double> theta) const {
    (void)y;
    (void)theta;
    return law.mean;
  }

  /// Full adaptation hook; engaged when the observation equation is Gaussian.
  virtual std::optional<GaussianObs> gaussian_obs(std::span<const double> theta) const {
    (void)theta;
    return std::nullopt;
  }
  bool fully_adaptable(std::span<const double> theta) const {
    return gaussian_obs(theta).has_value();
  }

  /// Forward simulation from the data-generating process.
  virtual Dataset simulate(std::span<const double> theta, std::size_t T,
                           RandomStream& rs) const;

 protected:
  ModelInfo info_;
};

/// Draw x_{t+1} given x_t by sampling the model's transition law.
State sample_transition(const Model& model, const State& prev, std::span<const double> theta,
                        std::optional<double> y_prev, RandomStream& rs);

/// Lookup by CLI name: ar1, binomial, sv, sv-lev, sv-out, sv-lev-out, garch.
std::unique_ptr<Model> make_model(const std::string& name, long binomial_trials = 100);

}  // namespace pfmc
