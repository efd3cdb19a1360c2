#include "pfmc/arwm.hpp"

#include <algorithm>
#include <cmath>

#include "pfmc/errors.hpp"

namespace pfmc {

ArwmState::ArwmState(int dim, long j0, Eigen::MatrixXd sigma1, double w1_after)
    : d_(dim), j0_(j0 > 0 ? j0 : std::max<long>(100, 10 * dim)), w1_after_(w1_after) {
  if (dim < 1) throw ConfigError("ArwmState: dimension must be positive");
  if (sigma1.size() == 0) sigma1 = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma1);
  if (llt.info() != Eigen::Success)
    throw ConfigError("ArwmState: Sigma1 must be positive definite");
  sigma1_chol_ = llt.matrixL();
  mean_ = Eigen::VectorXd::Zero(dim);
  m2_ = Eigen::MatrixXd::Zero(dim, dim);
}

void ArwmState::record(const Eigen::VectorXd& z) {
  ++count_;
  const Eigen::VectorXd delta = z - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (z - mean_).transpose();
}

Eigen::MatrixXd ArwmState::sigma2() const {
  if (count_ < 2) throw ConfigError("ArwmState: covariance needs two iterates");
  return m2_ / static_cast<double>(count_ - 1);
}

bool ArwmState::adapted_ready() const { return count_ > j0_ && count_ >= d_ + 2; }

Eigen::VectorXd ArwmState::propose(const Eigen::VectorXd& z, RandomStream& rs) const {
  Eigen::VectorXd step(d_);
  bool use_fixed = !adapted_ready();
  if (!use_fixed && rs.uniform() < w1_after_) use_fixed = true;
  if (!use_fixed) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma2());
    if (llt.info() != Eigen::Success) {
      use_fixed = true;  // singular history; behave as if j0 were longer
    } else {
      for (int i = 0; i < d_; ++i) step[i] = rs.normal();
      return z + std::sqrt(kappa2()) * (Eigen::MatrixXd(llt.matrixL()) * step);
    }
  }
  for (int i = 0; i < d_; ++i) step[i] = rs.normal();
  return z + std::sqrt(kappa1()) * (sigma1_chol_ * step);
}

}  // namespace pfmc
