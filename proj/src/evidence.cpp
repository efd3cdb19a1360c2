#include "pfmc/evidence.hpp"

#include <cmath>

#include "pfmc/mathutil.hpp"

namespace pfmc {

double estimate_log_u(double log_kernel_at_ref, double log_q_at_ref) {
  return log_kernel_at_ref - log_q_at_ref;
}

EvidenceResult estimate_evidence(const EvidenceDraws& posterior,
                                 const EvidenceDraws& proposal, double log_u) {
  if (posterior.log_kernel.empty() || proposal.log_kernel.empty())
    throw EvidenceError("evidence: empty draw set");
  EvidenceResult out;
  out.log_u = log_u;
  out.n_posterior = posterior.log_kernel.size();
  out.n_proposal = proposal.log_kernel.size();

  for (std::size_t i = 0; i < proposal.log_kernel.size(); ++i)
    if (!std::isfinite(proposal.log_kernel[i]) || std::isnan(proposal.log_q[i]))
      ++out.exclusions;
  if (10 * out.exclusions > out.n_proposal)
    throw EvidenceError("evidence: more than 10% of proposal draws were degenerate");

  // t(theta) = 1 / (kernel/U + q); all sums in the log domain.
  auto log_t = [log_u](double lk, double lq) {
    return -log_add_exp(lk - log_u, lq);
  };

  std::vector<double> bridge_post(out.n_posterior);
  for (std::size_t i = 0; i < out.n_posterior; ++i)
    bridge_post[i] = log_t(posterior.log_kernel[i], posterior.log_q[i]) + posterior.log_q[i];

  std::vector<double> bridge_prop;
  std::vector<double> is_terms;
  bridge_prop.reserve(out.n_proposal);
  is_terms.reserve(out.n_proposal);
  for (std::size_t i = 0; i < out.n_proposal; ++i) {
    const double lk = proposal.log_kernel[i];
    const double lq = proposal.log_q[i];
    if (std::isnan(lk) || std::isnan(lq)) continue;  // excluded above
    bridge_prop.push_back(lk == kNegInf ? kNegInf : log_t(lk, lq) + lk);
    is_terms.push_back(lk == kNegInf ? kNegInf : lk - lq);
  }

  const double log_a = log_mean_exp(bridge_post);
  const double log_a1 = log_mean_exp(bridge_prop);
  if (log_a == kNegInf || log_a1 == kNegInf)
    throw EvidenceError("evidence: bridge estimator underflowed to zero");
  out.log_bs = log_a1 - log_a;

  const double log_is = log_mean_exp(is_terms);
  if (log_is == kNegInf) throw EvidenceError("evidence: all importance ratios are zero");
  out.log_is = log_is;
  return out;
}

EvidenceResult evidence_from_chain(const Model& model, const PriorSpec& prior,
                                   const Dataset& data, const ParamSpace& space,
                                   const ChainRecord& record, const LikelihoodSpec& lik,
                                   const EvidenceOptions& opts) {
  if (!record.proposal)
    throw EvidenceError("evidence requires a chain with an adaptive independence proposal");
  const ProposalMixture& q = *record.proposal;

  // Posterior side: retained (post-burn, optionally thinned) iterates with
  // their cached targets. log_target is exactly kernel in these coordinates.
  EvidenceDraws post;
  std::vector<std::vector<double>> post_nat;
  for (std::size_t j = static_cast<std::size_t>(record.burn_in); j < record.z.size();
       j += static_cast<std::size_t>(std::max<long>(opts.thin, 1))) {
    post.log_kernel.push_back(record.log_target[j]);
    post.log_q.push_back(q.log_pdf(record.z[j]));
    post_nat.push_back(record.natural[j]);
  }
  if (post.log_kernel.empty()) throw EvidenceError("evidence: no retained posterior draws");

  // Proposal side: fresh draws from q with fresh likelihood evaluations.
  const std::size_t n_prop =
      opts.n_proposal > 0 ? opts.n_proposal : post.log_kernel.size();
  const std::uint64_t chain_id = record.chain_id + opts.chain_id_offset;
  RandomStream rs_draw(record.seed, (chain_id << 48) | 1);

  std::vector<Eigen::VectorXd> zs(n_prop);
  for (auto& z : zs) z = q.sample(rs_draw);

  EvidenceDraws prop;
  prop.log_kernel.resize(n_prop);
  prop.log_q.resize(n_prop);
  const auto kernels = parallel_map(opts.threads, n_prop, [&](std::size_t i) {
    const std::vector<double> nat = space.unpack(zs[i]);
    const double lpj = prior.log_pdf(nat) + space.log_jacobian(nat);
    if (lpj == kNegInf) return kNegInf;
    const std::uint64_t stream = (chain_id << 48) | (static_cast<std::uint64_t>(i) << 8);
    return eval_loglik(model, nat, data, lik, record.seed, stream, 1) + lpj;
  });
  for (std::size_t i = 0; i < n_prop; ++i) {
    prop.log_kernel[i] = kernels[i];
    prop.log_q[i] = q.log_pdf(zs[i]);
  }

  // Scaling constant from the posterior-mean point, with one more
  // evaluation; fall back to the best retained draw if q vanishes there.
  std::vector<double> mean_nat(post_nat[0].size(), 0.0);
  for (const auto& row : post_nat)
    for (std::size_t i = 0; i < row.size(); ++i) mean_nat[i] += row[i];
  for (double& v : mean_nat) v /= static_cast<double>(post_nat.size());

  double log_u = 0.0;
  bool ref_ok = false;
  try {
    const std::vector<double> full = space.assemble(mean_nat);
    const Eigen::VectorXd z_ref = space.pack(full);
    const double lpj = prior.log_pdf(full) + space.log_jacobian(full);
    const double log_q_ref = q.log_pdf(z_ref);
    if (lpj > kNegInf && log_q_ref > kNegInf) {
      const std::uint64_t stream = (chain_id << 48) | 2;
      const double kernel =
          eval_loglik(model, full, data, lik, record.seed, stream, 1) + lpj;
      if (std::isfinite(kernel)) {
        log_u = estimate_log_u(kernel, log_q_ref);
        ref_ok = true;
      }
    }
  } catch (const TransformError&) {
    // posterior mean on a support boundary; fall through
  }
  if (!ref_ok) {
    // Fall back to the retained draw with the highest cached kernel.
    std::size_t best = 0;
    for (std::size_t i = 1; i < post.log_kernel.size(); ++i)
      if (post.log_kernel[i] > post.log_kernel[best]) best = i;
    log_u = estimate_log_u(post.log_kernel[best], post.log_q[best]);
  }

  return estimate_evidence(post, prop, log_u);
}

}  // namespace pfmc
