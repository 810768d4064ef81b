#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "lcrm/runner/config.hpp"
#include "lcrm/runner/result.hpp"

namespace lcrm::runner {

struct RunOptions {
  int threads = 0;  // 0: LCRM_THREADS, else hardware concurrency
  std::function<void(const std::string&)> log;
};

int default_threads();

// Per-trial seed for trial t of group g.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t group, std::uint64_t trial);

// Runs the named experiment. Numerical failures propagate as
// lcrm::NumericalError carrying the trial seed.
ExperimentResult run(const ExperimentConfig& config, const RunOptions& options = {});

ExperimentResult run_mp_check(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentResult run_rigidity(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentResult run_local_law(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentResult run_edge_tw(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentResult run_spike(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentResult run_concentration(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentResult run_interp(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentResult run_green_compare(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace lcrm::runner
