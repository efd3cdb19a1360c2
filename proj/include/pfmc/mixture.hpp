#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pfmc/random.hpp"

namespace pfmc {

/// Mixture of full-covariance normals with cached Cholesky factors.
class GaussianMixture {
 public:
  struct Component {
    double weight = 1.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
  };

  GaussianMixture() = default;
  explicit GaussianMixture(std::vector<Component> comps);

  static GaussianMixture single(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

  bool empty() const { return comps_.empty(); }
  std::size_t n_components() const { return comps_.size(); }
  int dim() const { return comps_.empty() ? 0 : static_cast<int>(comps_[0].mean.size()); }
  const std::vector<Component>& components() const { return comps_; }

  double log_pdf(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(RandomStream& rs) const;

  /// Same means and weights with every covariance multiplied by `factor`
  /// (the heavy-tailed companion construction).
  GaussianMixture scaled_cov(double factor) const;

 private:
  struct Cached {
    Eigen::MatrixXd chol_lower;
    double log_norm = 0.0;  // -(d/2) log(2 pi) - (1/2) log det(cov)
  };
  std::vector<Component> comps_;
  std::vector<Cached> cache_;
};

/// Maximum-likelihood mixture of k normals by EM with k-means++
/// initialization, deterministic given the stream. Covariances are
/// regularized by 1e-8 * trace/d on the diagonal at every M step. Requires
/// at least 10*d*k rows (FitError otherwise).
GaussianMixture fit_mixture(const Eigen::MatrixXd& rows, int k, RandomStream rs,
                            int max_iter = 200, double tol = 1e-8);

}  // namespace pfmc
