#include "spo/experiment.hpp"

#include <exception>

#include <omp.h>

namespace spo {

ExperimentSetup make_setup(EnvironmentSpec spec, const SpoConfig& cfg, const ModelOptions& model) {
    validate_config(cfg);
    spec.control_interval = cfg.control_interval;
    CalibrationResult cal = calibrate_weights(spec, 4, cfg.rng_seed);
    return {std::move(spec), cfg, std::move(cal.weights), model};
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
    return seeds;
}

namespace {

RunMetrics run_one(BaselineKind kind, const ExperimentSetup& setup, std::uint64_t seed) {
    SessionOptions opts;
    opts.kind = kind;
    opts.model = setup.model;
    opts.seed = seed;
    opts.keep_records = false;
    return run_virtual_session(setup.spec, setup.cfg, setup.weights, opts).metrics;
}

}  // namespace

std::vector<RunMetrics> run_experiment_serial(BaselineKind kind, const ExperimentSetup& setup,
                                              const std::vector<std::uint64_t>& seeds) {
    std::vector<RunMetrics> out;
    out.reserve(seeds.size());
    for (auto seed : seeds) out.push_back(run_one(kind, setup, seed));
    return out;
}

std::vector<RunMetrics> run_experiment(BaselineKind kind, const ExperimentSetup& setup,
                                       const std::vector<std::uint64_t>& seeds, int jobs) {
    validate_config(setup.cfg);
    std::vector<RunMetrics> out(seeds.size());
    std::exception_ptr failure;
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    const auto n = static_cast<long>(seeds.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = run_one(kind, setup, seeds[static_cast<std::size_t>(i)]);
        } catch (...) {
#pragma omp critical(spo_experiment_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace spo
