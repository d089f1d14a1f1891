#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spo/ahs.hpp"
#include "spo/cloud.hpp"
#include "spo/config.hpp"
#include "spo/edge.hpp"
#include "spo/environments.hpp"

namespace spo {

enum class BaselineKind { Blocking, T1SC, NFTC, SPO };

std::string to_string(BaselineKind k);
BaselineKind parse_baseline_kind(const std::string& name);
std::vector<BaselineKind> all_baseline_kinds();

/// Nominal speculative depth: 0 / 1 / 10 for the fixed baselines, -1 for SPO.
int nominal_horizon(BaselineKind k);

/// Cloud-side horizon controller for a kind. Blocking still ships one
/// action per round trip, so it is pinned at 1 internally.
AhsState horizon_controller(BaselineKind k, const SpoConfig& cfg);

struct RunMetrics {
    std::string kind;
    std::uint64_t seed = 0;
    bool success = false;
    std::uint64_t steps_taken = 0;
    double sim_wall_time = 0.0;  // steps_taken * control_interval
    double idle_time = 0.0;      // (misses + holds + awaiting) * control_interval
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t holds = 0;     // starved-hold ticks (refill requested)
    std::uint64_t awaiting = 0;  // hold ticks with a refill already in flight
    std::uint64_t direct = 0;    // Blocking: unverified synchronous actions
    double hit_rate = 0.0;       // hits / max(1, hits + misses + holds)
    double mean_horizon = 0.0;   // over refill events
    std::uint64_t refills = 0;
    std::uint64_t generated_predictions = 0;
    std::uint64_t executed_predictions = 0;
    std::uint64_t wasted_predictions = 0;
    std::uint64_t leftover_predictions = 0;  // cached or in flight when the run ended
    int subgoals_completed = 0;
    std::uint64_t bytes_up = 0;
    std::uint64_t bytes_down = 0;
    std::string diagnostic;  // non-empty when the run was aborted

    friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct RunResult {
    RunMetrics metrics;
    std::vector<StepRecord> records;
    std::vector<int> granted_horizons;  // per accepted refill, in arrival order
};

struct SessionOptions {
    BaselineKind kind = BaselineKind::SPO;
    ModelOptions model;
    std::uint64_t seed = 1;
    bool keep_records = true;
};

/// Derives an independent RNG seed for one stream of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum SeedStream : std::uint64_t { kUplinkStream = 1, kDownlinkStream = 2, kModelStream = 3 };

/// One complete edge/cloud run on the virtual clock. Requests and responses
/// travel through the binary wire codec and two jittered FIFO channels.
RunResult run_virtual_session(const EnvironmentSpec& spec, const SpoConfig& cfg, const WeightMatrix& weights,
                              const SessionOptions& opts);

/// Fills the tick-derived fields of `m` (counts, idle time, hit rate) from
/// the step records.
void tally_records(const std::vector<StepRecord>& records, double control_interval, RunMetrics& m);

/// hits / (hits + misses) over records with step_index >= from_step; 1 when
/// nothing was verified.
double verified_hit_rate(const std::vector<StepRecord>& records, std::uint64_t from_step = 0);

}  // namespace spo
