#include "pfmc/filter.hpp"

#include <cmath>

#include "pfmc/mathutil.hpp"
#include "pfmc/resampling.hpp"

namespace pfmc {

FilterVariant parse_variant(const std::string& s) {
  if (s == "sir") return FilterVariant::Sir;
  if (s == "fapf") return FilterVariant::Fapf;
  if (s == "papf") return FilterVariant::Papf;
  if (s == "papf-eps") return FilterVariant::PapfEpsilon;
  throw ConfigError("unknown filter variant '" + s + "'");
}

std::string variant_name(FilterVariant v) {
  switch (v) {
    case FilterVariant::Sir: return "sir";
    case FilterVariant::Fapf: return "fapf";
    case FilterVariant::Papf: return "papf";
    case FilterVariant::PapfEpsilon: return "papf-eps";
  }
  return "?";
}

namespace {

double sample_law(const GaussianLaw& law, RandomStream& rs) {
  return law.mean + std::sqrt(law.var) * rs.normal();
}

class SirAdapter final : public StepAdapter {
 public:
  SirAdapter(const Model& model, std::span<const double> theta,
             std::span<const State> states, double y_next, std::optional<double> y_prev)
      : model_(model), theta_(theta), states_(states), y_(y_next), y_prev_(y_prev) {}

  double lookahead(std::size_t) const override { return 0.0; }

  State propose(std::size_t k, RandomStream& rs) const override {
    const GaussianLaw law = model_.transition_law(states_[k], theta_, y_prev_, rs);
    return model_.advance(states_[k], sample_law(law, rs), theta_);
  }

  // Proposal equals the transition, so the densities cancel analytically.
  double step4_logw(std::size_t, const State& x_new) const override {
    return model_.log_obs(y_, x_new, theta_);
  }

 private:
  const Model& model_;
  std::span<const double> theta_;
  std::span<const State> states_;
  double y_;
  std::optional<double> y_prev_;
};

class FapfAdapter final : public StepAdapter {
 public:
  FapfAdapter(const Model& model, std::span<const double> theta,
              std::span<const State> states, double y_next, std::optional<double> y_prev,
              const FilterStreams& streams, int t)
      : model_(model), theta_(theta), states_(states), y_(y_next) {
    const GaussianObs obs = *model.gaussian_obs(theta);
    const std::size_t m = states.size();
    law_.resize(m);
    post_.resize(m);
    lookahead_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      RandomStream prs = streams.prep(t, static_cast<std::uint32_t>(k));
      law_[k] = model.transition_law(states[k], theta, y_prev, prs);
      const double h = obs.coeff;
      lookahead_[k] = normal_logpdf(y_next, h * law_[k].mean, h * h * law_[k].var + obs.var);
      const double post_var = 1.0 / (h * h / obs.var + 1.0 / law_[k].var);
      post_[k] = {post_var * (h * y_next / obs.var + law_[k].mean / law_[k].var), post_var};
    }
  }

  double lookahead(std::size_t k) const override { return lookahead_[k]; }

  State propose(std::size_t k, RandomStream& rs) const override {
    return model_.advance(states_[k], sample_law(post_[k], rs), theta_);
  }

  // Identically zero for a conjugate pair; evaluated literally so the
  // algebra is checked on every run.
  double step4_logw(std::size_t k, const State& x_new) const override {
    return model_.log_obs(y_, x_new, theta_) +
           normal_logpdf(x_new.x, law_[k].mean, law_[k].var) - lookahead_[k] -
           normal_logpdf(x_new.x, post_[k].mean, post_[k].var);
  }

  const GaussianLaw* proposal_law(std::size_t k) const override { return &post_[k]; }

 private:
  const Model& model_;
  std::span<const double> theta_;
  std::span<const State> states_;
  double y_;
  std::vector<GaussianLaw> law_, post_;
  std::vector<double> lookahead_;
};

class PapfAdapter : public StepAdapter {
 public:
  PapfAdapter(const Model& model, std::span<const double> theta,
              std::span<const State> states, double y_next, std::optional<double> y_prev,
              const NewtonOptions& opts, const FilterStreams& streams, int t)
      : model_(model), theta_(theta), states_(states), y_(y_next) {
    const std::size_t m = states.size();
    law_.resize(m);
    prop_.resize(m);
    lookahead_.resize(m);
    adapted_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      RandomStream prs = streams.prep(t, static_cast<std::uint32_t>(k));
      law_[k] = model.transition_law(states[k], theta, y_prev, prs);
      adapted_[k] = laplace_fit(law_[k], opts, prop_[k], lookahead_[k]);
      if (!adapted_[k]) {
        prop_[k] = law_[k];
        lookahead_[k] = 0.0;
        ++fallbacks_;
      }
    }
  }

  double lookahead(std::size_t k) const override { return lookahead_[k]; }

  State propose(std::size_t k, RandomStream& rs) const override {
    return model_.advance(states_[k], sample_law(prop_[k], rs), theta_);
  }

  double step4_logw(std::size_t k, const State& x_new) const override {
    const double lobs = model_.log_obs(y_, x_new, theta_);
    if (!adapted_[k]) return lobs;  // per-particle SIR fallback
    return lobs + normal_logpdf(x_new.x, law_[k].mean, law_[k].var) - lookahead_[k] -
           normal_logpdf(x_new.x, prop_[k].mean, prop_[k].var);
  }

  const GaussianLaw* proposal_law(std::size_t k) const override {
    return adapted_[k] ? &prop_[k] : nullptr;
  }

  long fallback_count() const override { return fallbacks_; }

 protected:
  // Mode and curvature of lambda(x) = log p(y|x) + log N(x; law), giving the
  // Laplace proposal N(mode, s2) and the absolutely-scaled look-ahead
  // log g(y|x_t) = lambda(mode) + 0.5 log(2 pi s2).
  bool laplace_fit(const GaussianLaw& law, const NewtonOptions& opts, GaussianLaw& prop,
                   double& lookahead) const {
    double x = model_.newton_start(y_, law, theta_);
    ObsCurvature c = model_.obs_curvature(y_, x, theta_);
    auto lam_grad = [&](const ObsCurvature& oc, double xv) {
      return oc.grad - (xv - law.mean) / law.var;
    };
    auto lam_hess = [&](const ObsCurvature& oc) { return oc.hess - 1.0 / law.var; };

    bool ok = false;
    if (opts.fixed_steps > 0) {
      for (int s = 0; s < opts.fixed_steps; ++s) {
        const double h = lam_hess(c);
        if (!(h < 0.0)) return false;
        x -= lam_grad(c, x) / h;
        if (!std::isfinite(x)) return false;
        c = model_.obs_curvature(y_, x, theta_);
      }
      ok = lam_hess(c) < 0.0;
    } else if (opts.alt_iteration) {
      for (int it = 0; it < opts.max_iter; ++it) {
        if (std::fabs(lam_grad(c, x)) < opts.grad_tol) {
          ok = lam_hess(c) < 0.0;
          break;
        }
        x = law.mean + law.var * c.grad;
        if (!std::isfinite(x)) return false;
        c = model_.obs_curvature(y_, x, theta_);
      }
    } else {
      for (int it = 0; it < opts.max_iter; ++it) {
        const double g = lam_grad(c, x);
        const double h = lam_hess(c);
        if (std::fabs(g) < opts.grad_tol) {
          ok = h < 0.0;
          break;
        }
        if (!(h < 0.0)) return false;
        x -= g / h;
        if (!std::isfinite(x)) return false;
        c = model_.obs_curvature(y_, x, theta_);
      }
    }
    if (!ok) return false;
    const double s2 = -1.0 / lam_hess(c);
    if (!(s2 > 0.0) || !std::isfinite(s2)) return false;
    prop = {x, s2};
    lookahead =
        c.value + normal_logpdf(x, law.mean, law.var) + 0.5 * (kLogTwoPi + std::log(s2));
    return true;
  }

  const Model& model_;
  std::span<const double> theta_;
  std::span<const State> states_;
  double y_;
  std::vector<GaussianLaw> law_, prop_;
  std::vector<double> lookahead_;
  std::vector<char> adapted_;
  long fallbacks_ = 0;
};

// Corollary-style mixture: with probability eps propagate blindly (plain
// SIR), otherwise use the adapted pair. Because the look-ahead weights are
// absolutely scaled, the joint proposal density is
//   eps * p(x'|x) + (1-eps) * g0(y|x) g0(x'|x;y),
// which bounds every second-stage weight by sup p(y|x') / eps.
class EpsilonPapfAdapter final : public PapfAdapter {
 public:
  EpsilonPapfAdapter(const Model& model, std::span<const double> theta,
                     std::span<const State> states, double y_next,
                     std::optional<double> y_prev, const NewtonOptions& opts, double eps,
                     const FilterStreams& streams, int t)
      : PapfAdapter(model, theta, states, y_next, y_prev, opts, streams, t),
        log_eps_(std::log(eps)),
        log_1m_eps_(std::log1p(-eps)) {}

  double lookahead(std::size_t k) const override {
    return log_add_exp(log_eps_, log_1m_eps_ + lookahead_[k]);
  }

  State propose(std::size_t k, RandomStream& rs) const override {
    const double p_blind = std::exp(log_eps_ - lookahead(k));
    const GaussianLaw& src = rs.uniform() < p_blind ? law_[k] : prop_[k];
    return model_.advance(states_[k], sample_law(src, rs), theta_);
  }

  double step4_logw(std::size_t k, const State& x_new) const override {
    const double lp_trans = normal_logpdf(x_new.x, law_[k].mean, law_[k].var);
    const double lp_prop = normal_logpdf(x_new.x, prop_[k].mean, prop_[k].var);
    const double log_joint =
        log_add_exp(log_eps_ + lp_trans, log_1m_eps_ + lookahead_[k] + lp_prop);
    return model_.log_obs(y_, x_new, theta_) + lp_trans - log_joint;
  }

 private:
  double log_eps_, log_1m_eps_;
};

}  // namespace

std::unique_ptr<StepAdapter> make_step_adapter(const Model& model,
                                               std::span<const double> theta,
                                               const FilterConfig& cfg,
                                               std::span<const State> states, double y_next,
                                               std::optional<double> y_prev,
                                               const FilterStreams& streams, int t) {
  switch (cfg.variant) {
    case FilterVariant::Sir:
      return std::make_unique<SirAdapter>(model, theta, states, y_next, y_prev);
    case FilterVariant::Fapf:
      if (!model.gaussian_obs(theta))
        throw UnsupportedVariant("model '" + model.info().name + "' is not fully adaptable");
      return std::make_unique<FapfAdapter>(model, theta, states, y_next, y_prev, streams, t);
    case FilterVariant::Papf:
      if (!model.info().partially_adaptable)
        throw UnsupportedVariant("model '" + model.info().name +
                                 "' is not partially adaptable");
      return std::make_unique<PapfAdapter>(model, theta, states, y_next, y_prev, cfg.newton,
                                           streams, t);
    case FilterVariant::PapfEpsilon:
      if (!model.info().partially_adaptable)
        throw UnsupportedVariant("model '" + model.info().name +
                                 "' is not partially adaptable");
      if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
        throw ConfigError("epsilon must lie strictly in (0,1)");
      return std::make_unique<EpsilonPapfAdapter>(model, theta, states, y_next, y_prev,
                                                  cfg.newton, cfg.epsilon, streams, t);
  }
  throw ConfigError("unknown filter variant");
}

StepResult asir_step(const StepAdapter& adapter, std::span<const State> states,
                     std::span<const double> probs, const FilterStreams& streams, int t) {
  const std::size_t m = states.size();
  StepResult out;

  std::vector<double> w1(m);
  for (std::size_t k = 0; k < m; ++k) w1[k] = adapter.lookahead(k) + std::log(probs[k]);

  WeightVector stage1;
  try {
    stage1 = normalize_log_weights(std::move(w1));
  } catch (const TotalWeightZero&) {
    out.degenerate = true;
    out.log_increment = kNegInf;
    return out;
  }
  const double log_sum1 = stage1.log_mean + std::log(static_cast<double>(m));

  RandomStream rs_resample = streams.resample(t);
  const auto idx = stratified_resample(stage1, m, rs_resample);

  out.states.resize(m);
  out.step4_logw.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    RandomStream rs = streams.slot(t, static_cast<std::uint32_t>(i));
    out.states[i] = adapter.propose(idx[i], rs);
    out.step4_logw[i] = adapter.step4_logw(idx[i], out.states[i]);
  }

  WeightVector stage4;
  try {
    stage4 = normalize_log_weights(out.step4_logw);
  } catch (const TotalWeightZero&) {
    out.degenerate = true;
    out.log_increment = kNegInf;
    return out;
  }
  out.probs = std::move(stage4.normalized);
  out.log_increment = stage4.log_mean + log_sum1;
  return out;
}

FilterOutput run_filter(const Model& model, std::span<const double> theta,
                        const Dataset& data, const FilterConfig& cfg, RandomStream rs) {
  if (cfg.n_particles < 1) throw ConfigError("run_filter: need at least one particle");
  if (cfg.n_particles > 0xFFFFFFFFull) throw ConfigError("run_filter: too many particles");
  if (data.y.empty()) throw ConfigError("run_filter: empty dataset");
  if (theta.size() != model.n_params())
    throw ConfigError("run_filter: parameter dimension mismatch");

  const std::size_t m = cfg.n_particles;
  const FilterStreams streams(rs);

  FilterOutput out;
  out.step_loglik.reserve(data.y.size());

  std::vector<State> states(m);
  for (std::size_t k = 0; k < m; ++k) {
    RandomStream is = streams.init(static_cast<std::uint32_t>(k));
    states[k] = model.sample_initial(theta, is);
  }
  std::vector<double> probs(m, 1.0 / static_cast<double>(m));

  for (std::size_t t = 0; t < data.y.size(); ++t) {
    std::optional<double> y_prev;
    if (t >= 1) y_prev = data.y[t - 1];
    const auto adapter = make_step_adapter(model, theta, cfg, states, data.y[t], y_prev,
                                           streams, static_cast<int>(t));
    out.newton_fallbacks += adapter->fallback_count();
    StepResult step = asir_step(*adapter, states, probs, streams, static_cast<int>(t));
    if (step.degenerate) {
      out.degenerate = true;
      for (std::size_t r = t; r < data.y.size(); ++r) out.step_loglik.push_back(kNegInf);
      break;
    }
    out.step_loglik.push_back(step.log_increment);
    states = std::move(step.states);
    probs = std::move(step.probs);
  }

  out.total_loglik = 0.0;
  for (double v : out.step_loglik) out.total_loglik += v;
  if (cfg.keep_final_swarm && !out.degenerate) {
    out.final_swarm.states = std::move(states);
    out.final_swarm.probs = std::move(probs);
    out.final_swarm.t = static_cast<int>(data.y.size());
  }
  return out;
}

}  // namespace pfmc
