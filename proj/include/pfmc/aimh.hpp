#pragma once

#include <vector>

#include "pfmc/mixture.hpp"

namespace pfmc {

/// Four-group independence proposal for the adaptive sampler:
///   g1  fixed estimate of the target (single normal, or the stage-1 fit)
///   g2  g1 with covariances inflated 10x
///   g3  adapted mixture of up to six normals, refit on a schedule
///   g4  g3 with covariances inflated 20x
/// Until the first refit only (g1, g2) are active. Stage 2 replaces g1 by
/// the g3 reached at the end of stage 1.
class ProposalMixture {
 public:
  ProposalMixture(GaussianMixture g1, double w1_pre = 0.8, double w2_pre = 0.2);

  void set_adapted(GaussianMixture g3, const double weights[4]);
  void begin_stage2();
  /// Restores the stage flag without touching the groups (deserialization).
  void restore_stage(int stage) { stage_ = stage; }

  int stage() const { return stage_; }
  bool has_adapted() const { return !g3_.empty(); }
  const GaussianMixture& group(int k) const;  // k = 1..4
  const double* weights() const { return w_; }
  int dim() const { return g1_.dim(); }

  double log_pdf(const Eigen::VectorXd& z) const;
  Eigen::VectorXd sample(RandomStream& rs) const;

 private:
  GaussianMixture g1_, g2_, g3_, g4_;
  double w_[4];
  int stage_ = 1;
};

/// Refit/growth schedule for the adapted group. The component count grows
/// with accepted draws per dimension, capped at max_components.
struct AimhSchedule {
  std::vector<long> checkpoints;
  std::vector<long> accept_thresholds = {0, 50, 150, 300, 600, 1000};
  int max_components = 6;
  long stage2_at = -1;  // iteration where stage 2 begins (-1: disabled)

  /// Default checkpoint ladder scaled to the run length.
  static AimhSchedule for_run(long n_iter);
};

struct ScheduleDecision {
  bool refit = false;
  int components = 1;
  int stage = 1;
};

ScheduleDecision aimh_update_schedule(long j, long accepted, int dim,
                                      const AimhSchedule& schedule);

}  // namespace pfmc
