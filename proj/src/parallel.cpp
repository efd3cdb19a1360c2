#include "pfmc/parallel.hpp"

#include <cstdlib>

#include "pfmc/mathutil.hpp"

namespace pfmc {

std::size_t default_worker_count() {
  if (const char* env = std::getenv("PFMC_WORKERS")) {
    const long v = std::atol(env);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

double mp2_loglik(const Model& model, std::span<const double> theta, const Dataset& data,
                  const FilterConfig& cfg, std::uint64_t seed, std::uint64_t stream_base,
                  std::size_t j_workers, std::size_t threads) {
  if (j_workers < 1) throw ConfigError("mp2_loglik: need at least one worker");
  const auto logliks = parallel_map(threads, j_workers, [&](std::size_t j) {
    RandomStream rs(seed, stream_base + j);
    return run_filter(model, theta, data, cfg, rs).total_loglik;
  });
  return log_sum_exp(logliks) - std::log(static_cast<double>(j_workers));
}

}  // namespace pfmc
