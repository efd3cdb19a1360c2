#include "pfmc/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "pfmc/mathutil.hpp"

namespace pfmc {

double inefficiency(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw ConfigError("inefficiency: need at least 100 iterates");
  bool constant = true;
  for (double x : series) constant = constant && x == series[0];
  if (constant) return std::numeric_limits<double>::infinity();
  const double m = mean(series);
  double c0 = 0.0;
  for (double x : series) c0 += sq(x - m);
  c0 /= static_cast<double>(n);

  const double threshold = 2.0 / std::sqrt(static_cast<double>(n));
  const std::size_t max_lag = std::min<std::size_t>(1000, n - 1);
  double acc = 0.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t i = lag; i < n; ++i) c += (series[i] - m) * (series[i - lag] - m);
    const double rho = c / static_cast<double>(n) / c0;
    acc += rho;  // the cutoff lag itself is included in the sum
    if (std::fabs(rho) < threshold) break;
  }
  return std::max(1.0, 1.0 + 2.0 * acc);
}

double ect_seconds(double inefficiency_factor, double seconds_per_iter) {
  if (!(inefficiency_factor >= 1.0)) throw ConfigError("ect: IF must be at least 1");
  if (!(seconds_per_iter > 0.0)) throw ConfigError("ect: time per iteration must be positive");
  return 1000.0 * inefficiency_factor * seconds_per_iter;
}

double acceptance_rate_pct(std::span<const char> accepted, long burn_in) {
  long n = 0, acc = 0;
  for (std::size_t j = static_cast<std::size_t>(std::max<long>(burn_in, 0));
       j < accepted.size(); ++j) {
    ++n;
    acc += accepted[j] ? 1 : 0;
  }
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(acc) / static_cast<double>(n);
}

SdStudyReport loglik_sd_study(const Model& model, std::span<const double> theta_true,
                              std::span<const Dataset> datasets,
                              std::span<const SdStudyCell> cells, std::size_t reps,
                              std::uint64_t seed, std::size_t threads) {
  if (reps < 2) throw ConfigError("sd study: need at least two replicates per cell");
  if (datasets.empty()) throw ConfigError("sd study: need at least one dataset");

  SdStudyReport report;
  report.n_datasets = datasets.size();
  report.n_reps = reps;

  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> medians, sds;
    for (std::size_t ds = 0; ds < datasets.size(); ++ds) {
      // Streams bind to the dataset's own tag, not its position, so the
      // report is invariant to dataset ordering.
      const auto tag_it = datasets[ds].meta.find("stream_tag");
      const std::uint64_t tag =
          tag_it != datasets[ds].meta.end() ? static_cast<std::uint64_t>(tag_it->second) : ds;
      const auto lls = parallel_map(threads, reps, [&](std::size_t r) {
        const std::uint64_t stream =
            (static_cast<std::uint64_t>(c) << 40) | (tag << 20) | r;
        return eval_loglik(model, theta_true, datasets[ds], cells[c].lik, seed, stream, 1);
      });
      medians.push_back(median(lls));
      sds.push_back(sample_sd(lls));
    }
    SdStudyRow row;
    row.label = cells[c].label;
    row.median_of_medians = median(medians);
    row.iqr_of_medians = iqr(medians);
    row.median_of_sds = median(sds);
    row.iqr_of_sds = iqr(sds);
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_sd_report_csv(const SdStudyReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "cell,median_of_medians,iqr_of_medians,median_of_sds,iqr_of_sds\n";
  for (const auto& row : report.rows)
    out << row.label << ',' << format_double(row.median_of_medians) << ','
        << format_double(row.iqr_of_medians) << ',' << format_double(row.median_of_sds) << ','
        << format_double(row.iqr_of_sds) << '\n';
}

std::vector<ChainDiagRow> chain_diagnostics(const ChainRecord& record) {
  std::vector<ChainDiagRow> rows;
  for (std::size_t p = 0; p < record.param_names.size(); ++p) {
    const std::vector<double> col = record.column(p);
    ChainDiagRow row;
    row.param = record.param_names[p];
    row.mean = mean(col);
    row.sd = sample_sd(col);
    row.inefficiency = inefficiency(col);
    row.ect = record.seconds_per_iter > 0.0
                  ? ect_seconds(std::max(row.inefficiency, 1.0), record.seconds_per_iter)
                  : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_chain_diag_csv(const std::vector<ChainDiagRow>& rows, double acceptance_pct,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "param,mean,sd,inefficiency,ect_seconds,acceptance_pct\n";
  for (const auto& row : rows)
    out << row.param << ',' << format_double(row.mean) << ',' << format_double(row.sd) << ','
        << format_double(row.inefficiency) << ',' << format_double(row.ect) << ','
        << format_double(acceptance_pct) << '\n';
}

}  // namespace pfmc
