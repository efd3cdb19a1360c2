#pragma once

#include <Eigen/Dense>

#include "pfmc/random.hpp"

namespace pfmc {

/// Adaptive random-walk Metropolis proposal: a mixture of a small fixed
/// kernel N(z, kappa1 Sigma1) and the covariance-adapted kernel
/// N(z, kappa2 Sigma2_j), with kappa1 = 0.1^2/d and kappa2 = 2.38^2/d.
/// The first kernel is used exclusively for the first j0 iterations and
/// with probability w1 afterwards; Sigma2_j is the running sample
/// covariance of all previous iterates, maintained by a stable one-pass
/// update, and is only used once it is nonsingular.
class ArwmState {
 public:
  ArwmState(int dim, long j0 = 0, Eigen::MatrixXd sigma1 = {}, double w1_after = 0.05);

  int dim() const { return d_; }
  long j0() const { return j0_; }
  double kappa1() const { return 0.01 / d_; }
  double kappa2() const { return 5.6644 / d_; }

  /// Folds the j-th iterate into the running covariance.
  void record(const Eigen::VectorXd& z);
  long recorded() const { return count_; }

  Eigen::VectorXd propose(const Eigen::VectorXd& z, RandomStream& rs) const;

  /// Sample covariance of the iterates recorded so far (needs two or more).
  Eigen::MatrixXd sigma2() const;

 private:
  bool adapted_ready() const;

  int d_;
  long j0_;
  double w1_after_;
  Eigen::MatrixXd sigma1_chol_;
  long count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;  // sum of outer products of deviations
};

}  // namespace pfmc
