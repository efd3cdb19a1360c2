#include "pfmc/model.hpp"

#include <cmath>

#include "pfmc/models/ar1.hpp"
#include "pfmc/models/binomial_ar.hpp"
#include "pfmc/models/garch.hpp"
#include "pfmc/models/sv.hpp"

namespace pfmc {

int Model::param_index(const std::string& name) const {
  for (std::size_t i = 0; i < info_.params.size(); ++i)
    if (info_.params[i].name == name) return static_cast<int>(i);
  throw ConfigError("model '" + info_.name + "' has no parameter '" + name + "'");
}

State sample_transition(const Model& model, const State& prev, std::span<const double> theta,
                        std::optional<double> y_prev, RandomStream& rs) {
  const GaussianLaw law = model.transition_law(prev, theta, y_prev, rs);
  return model.advance(prev, law.mean + std::sqrt(law.var) * rs.normal(), theta);
}

Dataset Model::simulate(std::span<const double> theta, std::size_t T,
                        RandomStream& rs) const {
  if (T < 1) throw ConfigError("simulate: T must be at least 1");
  Dataset data;
  data.name = info_.name;
  data.y.reserve(T);
  for (std::size_t i = 0; i < n_params(); ++i)
    data.meta["theta." + info_.params[i].name] = theta[i];

  State x = sample_initial(theta, rs);
  for (std::size_t t = 1; t <= T; ++t) {
    std::optional<double> y_prev;
    if (t >= 2) y_prev = data.y.back();
    x = sample_transition(*this, x, theta, y_prev, rs);
    data.y.push_back(sample_obs(x, theta, rs));
  }
  return data;
}

std::unique_ptr<Model> make_model(const std::string& name, long binomial_trials) {
  if (name == "ar1") return std::make_unique<Ar1Model>();
  if (name == "binomial") return std::make_unique<BinomialArModel>(binomial_trials);
  if (name == "sv") return std::make_unique<SvModel>(false, false);
  if (name == "sv-lev") return std::make_unique<SvModel>(true, false);
  if (name == "sv-out") return std::make_unique<SvModel>(false, true);
  if (name == "sv-lev-out") return std::make_unique<SvModel>(true, true);
  if (name == "garch") return std::make_unique<GarchModel>();
  throw ConfigError("unknown model '" + name + "'");
}

}  // namespace pfmc
