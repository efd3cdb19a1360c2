#pragma once

#include <span>
#include <vector>

#include "pfmc/chain.hpp"

namespace pfmc {

/// Draws with cached quantities for the marginal-likelihood estimators.
/// `log_kernel` is log [ p_S(y|theta) p(theta) |J| ] in the sampling
/// coordinates; `log_q` is the proposal density at the same point.
struct EvidenceDraws {
  std::vector<double> log_kernel;
  std::vector<double> log_q;
};

struct EvidenceResult {
  double log_bs = 0.0;
  double log_is = 0.0;
  double log_u = 0.0;
  std::size_t n_posterior = 0;
  std::size_t n_proposal = 0;
  std::size_t exclusions = 0;  // non-finite caches among the proposal draws
};

/// log U from one evaluation at a reference point (typically the posterior
/// mean): log p_S(y|theta*) + log p(theta*) - log q(theta*).
double estimate_log_u(double log_kernel_at_ref, double log_q_at_ref);

/// Bridge-sampling and importance-sampling estimates of log p(y) over the
/// same draw sets. Throws EvidenceError when the bridge numerator or
/// denominator underflows, or when more than 10% of the proposal draws
/// carry non-finite caches.
EvidenceResult estimate_evidence(const EvidenceDraws& posterior, const EvidenceDraws& proposal,
                                 double log_u);

struct EvidenceOptions {
  std::size_t n_proposal = 0;  // 0: match the retained posterior draws
  long thin = 1;
  std::size_t threads = 1;
  std::uint64_t chain_id_offset = 0x2000;  // stream namespace for the fresh evaluations
};

/// End-to-end evidence from a finished AIMH chain: reuses the recorded
/// posterior caches, draws fresh proposal points from the final mixture,
/// evaluates their simulated likelihoods, and runs both estimators.
EvidenceResult evidence_from_chain(const Model& model, const PriorSpec& prior,
                                   const Dataset& data, const ParamSpace& space,
                                   const ChainRecord& record, const LikelihoodSpec& lik,
                                   const EvidenceOptions& opts);

}  // namespace pfmc
