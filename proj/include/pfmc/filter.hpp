#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pfmc/model.hpp"
#include "pfmc/weights.hpp"

namespace pfmc {

enum class FilterVariant { Sir, Fapf, Papf, PapfEpsilon };

FilterVariant parse_variant(const std::string& s);
std::string variant_name(FilterVariant v);

/// Mode search options for partial adaptation. The default runs Newton-
/// Raphson to |gradient| < grad_tol; fixed_steps > 0 instead takes exactly
/// that many steps without a tolerance check, and alt_iteration switches to
/// the fixed-point update x <- mean + var * dlogobs(x).
struct NewtonOptions {
  double grad_tol = 1e-8;
  int max_iter = 50;
  int fixed_steps = 0;
  bool alt_iteration = false;
};

struct FilterConfig {
  FilterVariant variant = FilterVariant::Sir;
  std::size_t n_particles = 100;
  double epsilon = 0.1;  // PapfEpsilon mixing weight of the plain-SIR branch
  NewtonOptions newton;
  bool keep_final_swarm = false;
};

struct ParticleSwarm {
  std::vector<State> states;
  std::vector<double> probs;  // normalized weights
  int t = 0;
};

/// Derives the per-particle substreams of one filter run from its root
/// stream. Every (purpose, step, index) triple owns a disjoint counter
/// region, so particle-level work can run in any order or in parallel
/// without changing the draws.
class FilterStreams {
 public:
  explicit FilterStreams(RandomStream root) : root_(root) {}

  RandomStream init(std::uint32_t k) const { return fork(0, 0, k); }
  RandomStream slot(std::uint32_t t, std::uint32_t i) const { return fork(1, t + 1, i); }
  RandomStream prep(std::uint32_t t, std::uint32_t k) const { return fork(2, t + 1, k); }
  RandomStream resample(std::uint32_t t) const { return fork(3, t + 1, 0); }

 private:
  RandomStream fork(std::uint64_t purpose, std::uint64_t step, std::uint64_t index) const {
    return root_.fork((purpose << 60) | (step << 32) | index);
  }
  RandomStream root_;
};

/// One-step adapters: the look-ahead weight g(y_{t+1}|x_t^k), the proposal
/// g(x_{t+1}|x_t^k; y_{t+1}), and the second-stage weight. Look-ahead values
/// are absolutely scaled (they approximate the predictive density itself,
/// not just something proportional to it) so that adapters compose into
/// mixtures. Built once per step from the pre-resampling swarm; all methods
/// are const and safe to call concurrently for different particles.
class StepAdapter {
 public:
  virtual ~StepAdapter() = default;
  /// log g(y_next | x_k) for source particle k.
  virtual double lookahead(std::size_t k) const = 0;
  /// Draw the new state for a copy of source particle k.
  virtual State propose(std::size_t k, RandomStream& rs) const = 0;
  /// log [ p(y|x') p(x'|x_k) / (g(y|x_k) g(x'|x_k;y)) ].
  virtual double step4_logw(std::size_t k, const State& x_new) const = 0;
  /// Adapted proposal law for particle k, when one exists.
  virtual const GaussianLaw* proposal_law(std::size_t) const { return nullptr; }
  /// Particles whose mode search failed and fell back to the transition.
  virtual long fallback_count() const { return 0; }
};

/// Builds the adapter for one step. `prep` must be the step's preparation
/// streams; adapted variants consume one substream per source particle.
std::unique_ptr<StepAdapter> make_step_adapter(const Model& model,
                                               std::span<const double> theta,
                                               const FilterConfig& cfg,
                                               std::span<const State> states, double y_next,
                                               std::optional<double> y_prev,
                                               const FilterStreams& streams, int t);

struct StepResult {
  std::vector<State> states;
  std::vector<double> probs;
  std::vector<double> step4_logw;
  double log_increment = 0.0;
  bool degenerate = false;
};

/// One ASIR update: look-ahead reweighting, stratified resampling, proposal,
/// and second-stage weighting. The log increment is the per-step term of the
/// simulated likelihood, log[(1/M) sum w4] + log[sum w1].
StepResult asir_step(const StepAdapter& adapter, std::span<const State> states,
                     std::span<const double> probs, const FilterStreams& streams, int t);

struct FilterOutput {
  std::vector<double> step_loglik;
  double total_loglik = 0.0;
  bool degenerate = false;
  long newton_fallbacks = 0;
  ParticleSwarm final_swarm;  // filled when cfg.keep_final_swarm
};

/// Runs the filter over the whole series. The returned exp(total_loglik) is
/// an unbiased estimate of the likelihood; a fully degenerate step yields
/// -inf (simulated likelihood zero) rather than an error.
FilterOutput run_filter(const Model& model, std::span<const double> theta,
                        const Dataset& data, const FilterConfig& cfg, RandomStream rs);

}  // namespace pfmc
