#include "spo/ahs.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace spo {

namespace {

void check_state(const AhsState& s) {
    if (s.k_min < 1 || s.k_min > s.k_max || s.beta < 1 || s.horizon < s.k_min || s.horizon > s.k_max ||
        !(s.pending_violation >= 0.0)) {
        throw InvalidArgument(fmt::format("invalid AHS state (K={}, k_min={}, k_max={}, beta={}, pending={})",
                                          s.horizon, s.k_min, s.k_max, s.beta, s.pending_violation));
    }
}

}  // namespace

AhsState AhsState::initial(int k_min, int k_max, int beta) {
    AhsState s{k_min, k_min, k_max, beta, 0.0};
    check_state(s);
    return s;
}

AhsState AhsState::from_config(const SpoConfig& cfg) { return initial(cfg.k_min, cfg.k_max, cfg.beta); }

AhsState AhsState::fixed(int k) { return initial(k, k, 1); }

AhsState record_violation(const AhsState& state, double e_miss) {
    if (!(e_miss > 0.0) || !std::isfinite(e_miss))
        throw InvalidArgument(fmt::format("record_violation: e_miss must be positive, got {}", e_miss));
    AhsState next = state;
    next.pending_violation = e_miss;
    return next;
}

AhsState update_horizon(const AhsState& state, double epsilon_base) {
    check_state(state);
    if (!(epsilon_base > 0.0)) throw InvalidArgument("update_horizon: epsilon_base must be positive");

    AhsState next = state;
    if (state.pending_violation > 0.0) {
        // floor(K / rho) with rho = e_miss / epsilon, evaluated with a single rounding
        const double scaled = std::floor(static_cast<double>(state.horizon) * epsilon_base / state.pending_violation);
        const double clamped = std::clamp(scaled, static_cast<double>(state.k_min), static_cast<double>(state.k_max));
        next.horizon = static_cast<int>(clamped);
    } else {
        next.horizon = static_cast<int>(std::min<long long>(state.k_max, static_cast<long long>(state.horizon) + state.beta));
    }
    next.pending_violation = 0.0;
    return next;
}

}  // namespace spo
