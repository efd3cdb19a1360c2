#pragma once

#include <span>
#include <string>
#include <vector>

#include "pfmc/chain.hpp"
#include "pfmc/dataset.hpp"
#include "pfmc/model.hpp"

namespace pfmc {

/// Inefficiency factor IF = 1 + 2 sum_{j=1}^{L*} rho_j with biased (1/K)
/// autocorrelations, where L is the first lag with |rho_L| < 2/sqrt(K) and
/// L* = min(1000, L); the sum includes lag L* itself. Floored at 1; a
/// constant series reports +inf. Requires K >= 100.
double inefficiency(std::span<const double> series);

/// Equivalent computing time 1000 * IF * t, the time this sampler needs to
/// match the accuracy of 1000 independent draws.
double ect_seconds(double inefficiency_factor, double seconds_per_iter);

/// Percentage of accepted proposals over the post-burn-in window.
double acceptance_rate_pct(std::span<const char> accepted, long burn_in);

/// One cell of the log-likelihood spread study.
struct SdStudyCell {
  std::string label;
  LikelihoodSpec lik;
};

struct SdStudyRow {
  std::string label;
  double median_of_medians = 0.0;
  double iqr_of_medians = 0.0;
  double median_of_sds = 0.0;
  double iqr_of_sds = 0.0;
};

struct SdStudyReport {
  std::vector<SdStudyRow> rows;
  std::size_t n_datasets = 0;
  std::size_t n_reps = 0;
};

/// For each cell and dataset, runs `reps` filter replicates at theta_true
/// and records the median and SD of the simulated log likelihood; rows
/// summarize across datasets by median and IQR.
SdStudyReport loglik_sd_study(const Model& model, std::span<const double> theta_true,
                              std::span<const Dataset> datasets,
                              std::span<const SdStudyCell> cells, std::size_t reps,
                              std::uint64_t seed, std::size_t threads);

void write_sd_report_csv(const SdStudyReport& report, const std::string& path);

/// Per-parameter chain summary mirroring the sampler comparison tables.
struct ChainDiagRow {
  std::string param;
  double mean = 0.0;
  double sd = 0.0;
  double inefficiency = 0.0;
  double ect = 0.0;
};

std::vector<ChainDiagRow> chain_diagnostics(const ChainRecord& record);
void write_chain_diag_csv(const std::vector<ChainDiagRow>& rows, double acceptance_pct,
                          const std::string& path);

}  // namespace pfmc
