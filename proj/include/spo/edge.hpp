#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "spo/cloud.hpp"
#include "spo/config.hpp"
#include "spo/types.hpp"
#include "spo/verifier.hpp"

namespace spo {

/// FIFO of cached predictions. Successive entries target consecutive steps.
class TrajectoryCache {
public:
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    const SpeculativeTuple& front() const { return entries_.front(); }
    const std::deque<SpeculativeTuple>& entries() const noexcept { return entries_; }

    /// Throws InvalidArgument if `t` does not target back().step_index + 1.
    void push_back(SpeculativeTuple t);
    SpeculativeTuple pop_front();
    /// Empties the cache, returning how many entries were discarded.
    std::size_t flush() noexcept;

private:
    std::deque<SpeculativeTuple> entries_;
};

enum class StepOutcome {
    Hit,             // verified cached action executed
    Miss,            // verification failed, cache flushed, hold
    StarvedHold,     // cache empty, refill requested this tick, hold
    AwaitingRefill,  // cache empty, refill already in flight, hold
    Direct,          // Blocking baseline: unverified synchronous action
};

std::string to_string(StepOutcome o);

struct StepRecord {
    std::uint64_t step_index = 0;
    StepOutcome outcome = StepOutcome::StarvedHold;
    std::optional<double> error;
    ActionVector action_executed;
    double sim_time = 0.0;
};

struct TickResult {
    StepRecord record;
    TrajectoryCache cache;
    std::optional<RolloutRequest> request;  // request_id left 0; the session numbers requests
    std::size_t flushed = 0;                // entries discarded by a miss, excluding the missed one
};

/// One control tick: pop and verify the head entry, execute its action on a
/// hit, otherwise hold with the zero action and ask for a refill.
/// With `verify_entries == false` a popped entry executes unchecked (Blocking).
TickResult edge_tick(const TrajectoryCache& cache, const StateVector& observed, std::uint64_t step, double sim_time,
                     const SpoConfig& cfg, const WeightMatrix& weights, std::size_t d_a, bool request_in_flight,
                     bool verify_entries = true);

struct InstallResult {
    TrajectoryCache cache;
    std::size_t installed = 0;
    std::size_t dropped_stale = 0;  // entries for steps <= current_step
    std::size_t displaced = 0;      // entries of the previous cache replaced by the new plan
};

/// Replaces the cache with the entries targeting steps after current_step.
InstallResult install_response(const TrajectoryCache& cache, const std::vector<SpeculativeTuple>& entries,
                               std::uint64_t current_step);

/// Response form: a response whose request_id is not `latest_request_id`
/// is superseded and discarded entirely (all tuples reported as stale).
InstallResult install_response(const TrajectoryCache& cache, const RolloutResponse& resp, std::uint64_t current_step,
                               std::uint32_t latest_request_id);

/// Converts rollout tuples (s_{k+1}, a_k) into executable cache entries
/// (s_k, a_k) targeting step origin + k - 1, with s_1 = the state that was
/// sent in the request. The final predicted state has no action and is not
/// kept.
std::vector<SpeculativeTuple> plan_from_rollout(const StateVector& request_state, const RolloutResponse& resp);

/// Edge-side bookkeeping around edge_tick: request numbering, in-flight
/// tracking, plan rebasing after a hold, and prediction accounting.
class EdgeSession {
public:
    EdgeSession(SpoConfig cfg, WeightMatrix weights, std::size_t d_s, std::size_t d_a, bool verify = true);

    /// Hands over a response at the start of tick `current_step`.
    void deliver(const RolloutResponse& resp, std::uint64_t current_step);

    /// Runs tick `step`; returns the outgoing request, if any.
    std::optional<RolloutRequest> tick(std::uint64_t step, const StateVector& observed, double sim_time,
                                       StepRecord& record);

    const TrajectoryCache& cache() const noexcept { return cache_; }
    bool request_in_flight() const noexcept { return in_flight_; }
    std::uint64_t executed() const noexcept { return executed_; }
    std::uint64_t wasted() const noexcept { return wasted_; }
    std::uint64_t received() const noexcept { return received_; }
    std::uint64_t tuples_received() const noexcept { return tuples_received_; }
    const std::vector<int>& granted_horizons() const noexcept { return horizons_; }

private:
    SpoConfig cfg_;
    WeightMatrix weights_;
    std::size_t d_s_;
    std::size_t d_a_;
    bool verify_;

    TrajectoryCache cache_;
    std::uint32_t next_request_id_ = 1;
    std::uint32_t latest_request_id_ = 0;
    bool in_flight_ = false;
    StateVector request_state_;                 // as the cloud sees it (binary32-rounded)
    std::optional<std::uint64_t> hold_start_;   // first hold tick since the latest request

    std::uint64_t executed_ = 0;
    std::uint64_t wasted_ = 0;
    std::uint64_t received_ = 0;
    std::uint64_t tuples_received_ = 0;
    std::vector<int> horizons_;
};

/// Rounds every component through binary32, as the wire codec does.
StateVector round_to_float32(const StateVector& s);

}  // namespace spo
