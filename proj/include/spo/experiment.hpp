#pragma once

#include <cstdint>
#include <vector>

#include "spo/calibration.hpp"
#include "spo/session.hpp"

namespace spo {

struct ExperimentSetup {
    EnvironmentSpec spec;
    SpoConfig cfg;
    WeightMatrix weights;
    ModelOptions model;
};

/// Calibrates W for `spec` (4 episodes, seeded from cfg.rng_seed) and
/// bundles everything a run needs.
ExperimentSetup make_setup(EnvironmentSpec spec, const SpoConfig& cfg, const ModelOptions& model);

/// Consecutive seeds base, base + 1, ...
std::vector<std::uint64_t> seed_range(std::uint64_t base, int count);

/// One RunMetrics per seed, in seed-list order. Seeds run concurrently on
/// up to `jobs` OpenMP threads (0 = runtime default); each run owns its
/// environment, channels and RNG streams, so the output does not depend on
/// scheduling.
std::vector<RunMetrics> run_experiment(BaselineKind kind, const ExperimentSetup& setup,
                                       const std::vector<std::uint64_t>& seeds, int jobs = 0);

/// Single-threaded reference for run_experiment.
std::vector<RunMetrics> run_experiment_serial(BaselineKind kind, const ExperimentSetup& setup,
                                              const std::vector<std::uint64_t>& seeds);

}  // namespace spo
