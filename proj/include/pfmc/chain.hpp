#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pfmc/aimh.hpp"
#include "pfmc/arwm.hpp"
#include "pfmc/dataset.hpp"
#include "pfmc/filter.hpp"
#include "pfmc/kalman.hpp"
#include "pfmc/model.hpp"
#include "pfmc/parallel.hpp"

namespace pfmc {

/// How the simulated log likelihood is produced for one parameter point:
/// a single filter run, an MP2 average of mp2_workers runs with disjoint
/// streams, or (AR(1)+noise only) the exact Kalman value.
struct LikelihoodSpec {
  bool exact_kalman = false;
  FilterConfig filter;
  std::size_t mp2_workers = 1;
};

double eval_loglik(const Model& model, std::span<const double> theta, const Dataset& data,
                   const LikelihoodSpec& lik, std::uint64_t seed, std::uint64_t stream_base,
                   std::size_t threads);

/// Free/fixed split of a model's parameter vector. Sampling happens in the
/// unconstrained coordinates of the free parameters; fixed parameters keep
/// their configured natural values.
class ParamSpace {
 public:
  ParamSpace(const Model& model, std::vector<double> reference,
             const std::vector<std::string>& fixed_names = {});

  int dim() const { return static_cast<int>(free_idx_.size()); }
  const std::vector<std::string>& free_names() const { return free_names_; }

  Eigen::VectorXd pack(std::span<const double> natural) const;
  std::vector<double> unpack(const Eigen::VectorXd& z) const;
  double log_jacobian(std::span<const double> natural) const;
  /// Full natural vector from free-parameter values (fixed entries from the
  /// reference point).
  std::vector<double> assemble(std::span<const double> free_natural) const;

 private:
  std::vector<ParamMeta> metas_;
  std::vector<double> reference_;
  std::vector<int> free_idx_;
  std::vector<std::string> free_names_;
};

enum class SamplerKind { Arwm, Aimh };
enum class ParallelMode { SingleProcessor, Mp1, Mp2 };

SamplerKind parse_sampler(const std::string& s);
ParallelMode parse_mode(const std::string& s);

struct ChainConfig {
  SamplerKind sampler = SamplerKind::Aimh;
  long n_iter = 5000;
  long burn_in = 1000;

  ParallelMode mode = ParallelMode::SingleProcessor;
  std::size_t workers = 1;  // MP1: proposal workers J; MP2: likelihood workers J
  long block = 0;           // MP1 proposals per worker per round; 0 = follow the schedule

  LikelihoodSpec lik;
  std::vector<double> init_natural;  // empty: model defaults

  std::uint64_t seed = 1;
  std::uint64_t chain_id = 0;

  long arwm_j0 = 0;  // 0: max(100, 10 d)

  AimhSchedule schedule;  // empty checkpoints: AimhSchedule::for_run(n_iter)
  double w_pre[2] = {0.8, 0.2};
  double w_post[4] = {0.15, 0.05, 0.7, 0.1};
  long warm_iters = 2000;  // ARWM warm start for AIMH when no proposal is given
  long warm_burn = 500;
  std::optional<GaussianMixture> init_proposal;
};

struct ChainRecord {
  std::vector<std::string> param_names;        // free parameters
  std::vector<std::vector<double>> natural;    // one row per iteration
  std::vector<Eigen::VectorXd> z;
  std::vector<double> log_target;
  std::vector<double> log_lik;
  std::vector<char> accepted;
  std::vector<std::uint64_t> pf_streams;
  long burn_in = 0;
  double seconds = 0.0;
  double seconds_per_iter = 0.0;
  std::optional<ProposalMixture> proposal;  // final AIMH proposal
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;

  double acceptance_pct() const;
  /// Post-burn-in column of one free parameter, natural coordinates.
  std::vector<double> column(std::size_t param, bool post_burn = true) const;
};

/// log of the Metropolis-Hastings acceptance probability,
/// min{0, (proposed - current) target + log q ratio}; never above 0 and
/// -inf exactly when the proposed target is -inf.
double mh_log_alpha(double current_target, double proposed_target, double log_q_ratio);
bool mh_accept(double current_target, double proposed_target, double log_q_ratio,
               RandomStream& rs);

/// Runs one PMMH chain. Every proposed point triggers exactly one
/// likelihood evaluation with a fresh stream id recorded alongside the
/// iterate, so any accepted value can be regenerated bit-exactly. MP1
/// evaluates independence proposals in parallel blocks with a frozen
/// proposal and a serial selection pass; its iterate sequence is identical
/// to the serial replay of the same proposal list.
ChainRecord run_chain(const Model& model, const PriorSpec& prior, const Dataset& data,
                      const ParamSpace& space, const ChainConfig& cfg);

/// chain.csv (j, accepted, log_target, parameters) plus a JSON sidecar with
/// the seed, configuration echo, final proposal, and (optionally) timings.
void save_chain(const ChainRecord& record, const ChainConfig& cfg, const std::string& dir,
                bool include_timings = true);
ChainRecord load_chain(const std::string& dir);

}  // namespace pfmc
