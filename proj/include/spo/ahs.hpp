#pragma once

#include "spo/config.hpp"

namespace spo {

/// Adaptive horizon controller state. Treated as a value: the update
/// functions return a new state and never mutate their argument.
struct AhsState {
    int horizon = 2;
    int k_min = 2;
    int k_max = 10;
    int beta = 1;
    double pending_violation = 0.0;  // e_miss; 0 means none since the last update

    /// Starts at k_min with no pending violation.
    static AhsState initial(int k_min, int k_max, int beta);
    static AhsState from_config(const SpoConfig& cfg);
    /// A controller pinned at k (k_min == k_max == k), used by fixed-horizon baselines.
    static AhsState fixed(int k);

    friend bool operator==(const AhsState&, const AhsState&) = default;
};

/// Stores the latest violation error; the horizon is left unchanged.
/// Throws InvalidArgument unless e_miss > 0.
AhsState record_violation(const AhsState& state, double e_miss);

/// AIMD step. With a pending violation the horizon contracts to
/// max(k_min, floor(K * epsilon / e_miss)); otherwise it grows by beta up to
/// k_max. The pending violation is cleared in the same step.
///
/// When e_miss <= epsilon (ratio <= 1, not produced by the verifier) the
/// floor can exceed K; the result is still clamped to k_max.
AhsState update_horizon(const AhsState& state, double epsilon_base);

}  // namespace spo
