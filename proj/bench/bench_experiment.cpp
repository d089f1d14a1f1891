#include <chrono>
#include <cstdlib>
#include <string>

#include <fmt/format.h>
#include <omp.h>

#include "spo/experiment.hpp"

namespace {

template <class F>
double seconds(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// usage: spo_bench [env] [seeds] [repeats]
int main(int argc, char** argv) {
    const std::string env = argc > 1 ? argv[1] : "multi_stage";
    const int n_seeds = argc > 2 ? std::atoi(argv[2]) : 16;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

    auto setup = spo::make_setup(spo::make_environment(env), spo::SpoConfig{}, spo::ModelOptions::drifted());
    auto seeds = spo::seed_range(1, n_seeds);

    fmt::print("env {}  seeds {}  threads {}\n", env, n_seeds, omp_get_max_threads());
    fmt::print("{:<9} {:>12} {:>12} {:>8} {:>6}\n", "kind", "serial [s]", "openmp [s]", "speedup", "same");
    for (auto kind : spo::all_baseline_kinds()) {
        double ts = 1e300, tp = 1e300;
        bool same = true;
        for (int r = 0; r < repeats; ++r) {
            std::vector<spo::RunMetrics> a, b;
            ts = std::min(ts, seconds([&] { a = spo::run_experiment_serial(kind, setup, seeds); }));
            tp = std::min(tp, seconds([&] { b = spo::run_experiment(kind, setup, seeds); }));
            same = same && a == b;
        }
        fmt::print("{:<9} {:>12.4f} {:>12.4f} {:>7.2f}x {:>6}\n", spo::to_string(kind), ts, tp, ts / tp,
                   same ? "yes" : "NO");
    }
    return 0;
}
