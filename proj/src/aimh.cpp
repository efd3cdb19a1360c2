#include "pfmc/aimh.hpp"

#include <algorithm>
#include <cmath>

#include "pfmc/errors.hpp"
#include "pfmc/mathutil.hpp"

namespace pfmc {

ProposalMixture::ProposalMixture(GaussianMixture g1, double w1_pre, double w2_pre)
    : g1_(std::move(g1)), w_{w1_pre, w2_pre, 0.0, 0.0} {
  if (g1_.empty()) throw ConfigError("ProposalMixture: g1 must be nonempty");
  g2_ = g1_.scaled_cov(10.0);
}

void ProposalMixture::set_adapted(GaussianMixture g3, const double weights[4]) {
  if (g3.empty()) throw ConfigError("ProposalMixture: adapted group must be nonempty");
  g3_ = std::move(g3);
  g4_ = g3_.scaled_cov(20.0);
  for (int i = 0; i < 4; ++i) w_[i] = weights[i];
}

void ProposalMixture::begin_stage2() {
  if (stage_ == 2) return;
  stage_ = 2;
  if (!g3_.empty()) {
    g1_ = g3_;
    g2_ = g1_.scaled_cov(10.0);
  }
}

const GaussianMixture& ProposalMixture::group(int k) const {
  switch (k) {
    case 1: return g1_;
    case 2: return g2_;
    case 3: return g3_;
    case 4: return g4_;
  }
  throw ConfigError("ProposalMixture: group index must be 1..4");
}

double ProposalMixture::log_pdf(const Eigen::VectorXd& z) const {
  double acc = kNegInf;
  const GaussianMixture* groups[4] = {&g1_, &g2_, &g3_, &g4_};
  for (int k = 0; k < 4; ++k) {
    if (w_[k] <= 0.0 || groups[k]->empty()) continue;
    acc = log_add_exp(acc, std::log(w_[k]) + groups[k]->log_pdf(z));
  }
  return acc;
}

Eigen::VectorXd ProposalMixture::sample(RandomStream& rs) const {
  const GaussianMixture* groups[4] = {&g1_, &g2_, &g3_, &g4_};
  const double u = rs.uniform();
  double cdf = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (w_[k] <= 0.0 || groups[k]->empty()) continue;
    cdf += w_[k];
    if (u <= cdf) return groups[k]->sample(rs);
  }
  return g1_.sample(rs);
}

AimhSchedule AimhSchedule::for_run(long n_iter) {
  AimhSchedule s;
  const long ladder[] = {100,  200,  500,   1000,  1500,  2000,
                         3000, 4000, 5000,  10000, 15000, 20000};
  for (long c : ladder)
    if (c < n_iter) s.checkpoints.push_back(c);
  if (s.checkpoints.empty() && n_iter > 20) s.checkpoints.push_back(n_iter / 2);
  // Stage 2 at the checkpoint nearest to the midpoint.
  s.stage2_at = -1;
  for (long c : s.checkpoints)
    if (c <= n_iter / 2) s.stage2_at = c;
  return s;
}

ScheduleDecision aimh_update_schedule(long j, long accepted, int dim,
                                      const AimhSchedule& schedule) {
  ScheduleDecision d;
  d.refit = std::find(schedule.checkpoints.begin(), schedule.checkpoints.end(), j) !=
            schedule.checkpoints.end();
  const double ratio = static_cast<double>(accepted) / std::max(dim, 1);
  int k = 0;
  for (long thr : schedule.accept_thresholds)
    if (ratio >= static_cast<double>(thr)) ++k;
  d.components = std::clamp(k, 1, schedule.max_components);
  d.stage = (schedule.stage2_at > 0 && j >= schedule.stage2_at) ? 2 : 1;
  return d;
}

}  // namespace pfmc
