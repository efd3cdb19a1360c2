#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pfmc {

enum class StudyScale { Smoke, Desk, Paper };

StudyScale parse_scale(const std::string& s);

/// Optional overrides of the scale defaults (0 keeps the default).
struct StudyOverrides {
  long T = 0;
  long datasets = 0;
  long reps = 0;
  long iters = 0;
  int with_mcmc = -1;  // -1 default, 0 off, 1 on
};

std::vector<std::string> study_names();

/// Runs a named replication study end to end: simulates the study's
/// datasets, produces the log-likelihood spread table, and (where the study
/// defines one) the sampler comparison or evidence table. All artifacts are
/// deterministic functions of (name, scale, seed, overrides); worker count
/// and wall time never enter the outputs.
void run_study(const std::string& name, StudyScale scale, std::uint64_t seed,
               const std::string& outdir, std::size_t threads,
               const StudyOverrides& overrides = {});

}  // namespace pfmc
