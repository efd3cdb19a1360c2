#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "pfmc/dataset.hpp"
#include "pfmc/filter.hpp"
#include "pfmc/model.hpp"

namespace pfmc {

/// PFMC_WORKERS if set, else the hardware thread count.
std::size_t default_worker_count();

/// Runs f(0..n-1) on up to `workers` threads and collects results by task
/// index, so the output never depends on completion order. Tasks must be
/// pure functions of their index. workers <= 1 runs inline.
template <typename F>
auto parallel_map(std::size_t workers, std::size_t n, F&& f)
    -> std::vector<decltype(f(std::size_t{0}))> {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(n);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const std::size_t nthreads = std::min(workers, n);
  threads.reserve(nthreads);
  for (std::size_t w = 0; w < nthreads; ++w) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Likelihood averaging across workers: J independent filter runs with
/// disjoint streams (stream id base + j), combined in the likelihood domain
/// as log[(1/J) sum exp(L_j)]. The average of unbiased estimators stays
/// unbiased; all runs degenerate gives -inf.
double mp2_loglik(const Model& model, std::span<const double> theta, const Dataset& data,
                  const FilterConfig& cfg, std::uint64_t seed, std::uint64_t stream_base,
                  std::size_t j_workers, std::size_t threads);

}  // namespace pfmc
