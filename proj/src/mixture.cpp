#include "pfmc/mixture.hpp"

#include <cmath>
#include <limits>

#include "pfmc/errors.hpp"
#include "pfmc/mathutil.hpp"

namespace pfmc {

namespace {

// Ridge keeping near-singular covariances factorizable.
void regularize(Eigen::MatrixXd& cov) {
  const int d = static_cast<int>(cov.rows());
  const double ridge = std::max(1e-8 * cov.trace() / d, 1e-12);
  cov.diagonal().array() += ridge;
}

Eigen::MatrixXd chol_or_throw(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::MatrixXd fixed = cov;
  regularize(fixed);
  Eigen::LLT<Eigen::MatrixXd> retry(fixed);
  if (retry.info() != Eigen::Success)
    throw FitError("mixture component covariance is not positive definite");
  return retry.matrixL();
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<Component> comps) : comps_(std::move(comps)) {
  if (comps_.empty()) return;
  double total = 0.0;
  for (const auto& c : comps_) total += c.weight;
  if (!(total > 0.0)) throw FitError("mixture weights must be positive");
  cache_.reserve(comps_.size());
  const double d = static_cast<double>(comps_[0].mean.size());
  for (auto& c : comps_) {
    c.weight /= total;
    Cached cc;
    cc.chol_lower = chol_or_throw(c.cov);
    cc.log_norm = -0.5 * d * kLogTwoPi - cc.chol_lower.diagonal().array().log().sum();
    cache_.push_back(std::move(cc));
  }
}

GaussianMixture GaussianMixture::single(const Eigen::VectorXd& mean,
                                        const Eigen::MatrixXd& cov) {
  return GaussianMixture({Component{1.0, mean, cov}});
}

double GaussianMixture::log_pdf(const Eigen::VectorXd& x) const {
  double acc = kNegInf;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    const Eigen::VectorXd diff = x - comps_[i].mean;
    const Eigen::VectorXd y = cache_[i].chol_lower.triangularView<Eigen::Lower>().solve(diff);
    acc = log_add_exp(acc, std::log(comps_[i].weight) + cache_[i].log_norm -
                               0.5 * y.squaredNorm());
  }
  return acc;
}

Eigen::VectorXd GaussianMixture::sample(RandomStream& rs) const {
  const double u = rs.uniform();
  double cdf = 0.0;
  std::size_t pick = comps_.size() - 1;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    cdf += comps_[i].weight;
    if (u <= cdf) {
      pick = i;
      break;
    }
  }
  Eigen::VectorXd z(dim());
  for (int i = 0; i < dim(); ++i) z[i] = rs.normal();
  return comps_[pick].mean + cache_[pick].chol_lower * z;
}

GaussianMixture GaussianMixture::scaled_cov(double factor) const {
  std::vector<Component> comps = comps_;
  for (auto& c : comps) c.cov *= factor;
  return GaussianMixture(std::move(comps));
}

namespace {

std::vector<Eigen::VectorXd> kmeanspp_centers(const Eigen::MatrixXd& rows, int k,
                                              RandomStream& rs) {
  const auto n = static_cast<std::size_t>(rows.rows());
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(k);
  centers.push_back(rows.row(std::min<std::size_t>(
      static_cast<std::size_t>(rs.uniform() * static_cast<double>(n)), n - 1)));
  Eigen::VectorXd d2 = Eigen::VectorXd::Constant(static_cast<long>(n),
                                                 std::numeric_limits<double>::max());
  while (static_cast<int>(centers.size()) < k) {
    for (long i = 0; i < static_cast<long>(n); ++i)
      d2[i] = std::min(d2[i], (rows.row(i).transpose() - centers.back()).squaredNorm());
    const double total = d2.sum();
    if (!(total > 0.0)) {
      centers.push_back(centers.back());  // all points identical
      continue;
    }
    double u = rs.uniform() * total;
    long pick = static_cast<long>(n) - 1;
    for (long i = 0; i < static_cast<long>(n); ++i) {
      u -= d2[i];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(rows.row(pick));
  }
  return centers;
}

}  // namespace

GaussianMixture fit_mixture(const Eigen::MatrixXd& rows, int k, RandomStream rs,
                            int max_iter, double tol) {
  const long n = rows.rows();
  const long d = rows.cols();
  if (k < 1) throw ConfigError("fit_mixture: k must be positive");
  if (n < 10 * d * k)
    throw FitError("fit_mixture: need at least " + std::to_string(10 * d * k) + " rows, got " +
                   std::to_string(n));

  const Eigen::VectorXd grand_mean = rows.colwise().mean();
  auto covariance_about = [&](const Eigen::VectorXd& mu,
                              const Eigen::VectorXd& resp) -> Eigen::MatrixXd {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    double wsum = 0.0;
    for (long i = 0; i < n; ++i) {
      const Eigen::VectorXd diff = rows.row(i).transpose() - mu;
      cov += resp[i] * diff * diff.transpose();
      wsum += resp[i];
    }
    cov /= wsum;
    regularize(cov);
    return cov;
  };

  if (k == 1) {
    const Eigen::MatrixXd centered = rows.rowwise() - grand_mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    regularize(cov);
    return GaussianMixture::single(grand_mean, cov);
  }

  // k-means++ seeding plus a few Lloyd sweeps.
  auto centers = kmeanspp_centers(rows, k, rs);
  std::vector<int> assign(n, 0);
  for (int sweep = 0; sweep < 25; ++sweep) {
    bool moved = false;
    for (long i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        const double dist = (rows.row(i).transpose() - centers[c]).squaredNorm();
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        moved = true;
      }
    }
    for (int c = 0; c < k; ++c) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
      long count = 0;
      for (long i = 0; i < n; ++i)
        if (assign[i] == c) {
          sum += rows.row(i).transpose();
          ++count;
        }
      if (count > 0) centers[c] = sum / static_cast<double>(count);
    }
    if (!moved) break;
  }

  // Initial parameters from the hard clustering.
  std::vector<GaussianMixture::Component> comps(k);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd resp = Eigen::VectorXd::Zero(n);
    long count = 0;
    for (long i = 0; i < n; ++i)
      if (assign[i] == c) {
        resp[i] = 1.0;
        ++count;
      }
    comps[c].mean = centers[c];
    if (count >= 2) {
      comps[c].cov = covariance_about(centers[c], resp);
    } else {
      comps[c].cov = covariance_about(grand_mean, Eigen::VectorXd::Ones(n));
    }
    comps[c].weight = std::max(static_cast<double>(count), 1.0) / static_cast<double>(n);
  }

  // EM.
  Eigen::MatrixXd log_resp(n, k);
  double prev_ll = kNegInf;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<GaussianMixture> pieces;
    pieces.reserve(k);
    for (int c = 0; c < k; ++c)
      pieces.push_back(GaussianMixture::single(comps[c].mean, comps[c].cov));

    double ll = 0.0;
    for (long i = 0; i < n; ++i) {
      double row_lse = kNegInf;
      for (int c = 0; c < k; ++c) {
        log_resp(i, c) =
            std::log(comps[c].weight) + pieces[c].log_pdf(rows.row(i).transpose());
        row_lse = log_add_exp(row_lse, log_resp(i, c));
      }
      for (int c = 0; c < k; ++c) log_resp(i, c) -= row_lse;
      ll += row_lse;
    }

    for (int c = 0; c < k; ++c) {
      const Eigen::VectorXd resp = log_resp.col(c).array().exp();
      const double nc = resp.sum();
      if (nc < 1e-10 * static_cast<double>(n)) {
        comps[c].weight = 1e-10;
        continue;  // dead component; weight renormalized by the ctor
      }
      comps[c].weight = nc / static_cast<double>(n);
      comps[c].mean = (rows.transpose() * resp) / nc;
      comps[c].cov = covariance_about(comps[c].mean, resp);
    }

    if (iter > 0 && std::fabs(ll - prev_ll) < tol * (1.0 + std::fabs(prev_ll))) break;
    prev_ll = ll;
  }
  return GaussianMixture(std::move(comps));
}

}  // namespace pfmc
