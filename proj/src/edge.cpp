#include "spo/edge.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace spo {

void TrajectoryCache::push_back(SpeculativeTuple t) {
    if (!entries_.empty() && t.step_index != entries_.back().step_index + 1) {
        throw InvalidArgument(fmt::format("cache entry for step {} does not follow step {}", t.step_index,
                                          entries_.back().step_index));
    }
    entries_.push_back(std::move(t));
}

SpeculativeTuple TrajectoryCache::pop_front() {
    if (entries_.empty()) throw InvalidArgument("pop from empty trajectory cache");
    SpeculativeTuple t = std::move(entries_.front());
    entries_.pop_front();
    return t;
}

std::size_t TrajectoryCache::flush() noexcept {
    const std::size_t n = entries_.size();
    entries_.clear();
    return n;
}

std::string to_string(StepOutcome o) {
    switch (o) {
        case StepOutcome::Hit: return "hit";
        case StepOutcome::Miss: return "miss";
        case StepOutcome::StarvedHold: return "starved_hold";
        case StepOutcome::AwaitingRefill: return "awaiting_refill";
        case StepOutcome::Direct: return "direct";
    }
    return "unknown";
}

TickResult edge_tick(const TrajectoryCache& cache, const StateVector& observed, std::uint64_t step, double sim_time,
                     const SpoConfig& cfg, const WeightMatrix& weights, std::size_t d_a, bool request_in_flight,
                     bool verify_entries) {
    require_dimension(weights.size(), observed.size(), "edge_tick: observed state");

    TickResult r;
    r.cache = cache;
    r.record.step_index = step;
    r.record.sim_time = sim_time;

    auto hold_and_request = [&](StepOutcome outcome, double violation) {
        r.record.outcome = outcome;
        r.record.action_executed = zero_action(d_a);
        r.request = RolloutRequest{0, observed, violation, step};
    };

    if (r.cache.empty()) {
        if (request_in_flight) {
            r.record.outcome = StepOutcome::AwaitingRefill;
            r.record.action_executed = zero_action(d_a);
        } else {
            hold_and_request(StepOutcome::StarvedHold, 0.0);
        }
        return r;
    }

    SpeculativeTuple head = r.cache.pop_front();
    require_dimension(head.action.size(), d_a, "edge_tick: cached action");

    if (!verify_entries) {
        r.record.outcome = StepOutcome::Direct;
        r.record.action_executed = std::move(head.action);
        return r;
    }

    const VerificationOutcome v = verify(observed, head, weights, cfg.epsilon_base);
    r.record.error = v.error;
    if (v.decision == Decision::Hit) {
        r.record.outcome = StepOutcome::Hit;
        r.record.action_executed = std::move(head.action);
        const auto watermark = static_cast<std::size_t>(std::max(0, cfg.prefetch_low_watermark));
        if (watermark > 0 && r.cache.size() < watermark && !request_in_flight) {
            r.request = RolloutRequest{0, observed, 0.0, step};
        }
        return r;
    }

    r.flushed = r.cache.flush();
    hold_and_request(StepOutcome::Miss, v.error);
    return r;
}

InstallResult install_response(const TrajectoryCache& cache, const std::vector<SpeculativeTuple>& entries,
                               std::uint64_t current_step) {
    InstallResult out;
    out.displaced = cache.size();
    for (const auto& e : entries) {
        if (e.step_index <= current_step) {
            ++out.dropped_stale;
            continue;
        }
        out.cache.push_back(e);
        ++out.installed;
    }
    return out;
}

InstallResult install_response(const TrajectoryCache& cache, const RolloutResponse& resp, std::uint64_t current_step,
                               std::uint32_t latest_request_id) {
    if (resp.request_id != latest_request_id) {
        InstallResult out;
        out.cache = cache;
        out.dropped_stale = resp.tuples.size();
        return out;
    }
    return install_response(cache, resp.tuples, current_step);
}

std::vector<SpeculativeTuple> plan_from_rollout(const StateVector& request_state, const RolloutResponse& resp) {
    std::vector<SpeculativeTuple> plan;
    plan.reserve(resp.tuples.size());
    for (std::size_t k = 0; k < resp.tuples.size(); ++k) {
        const StateVector& expected = (k == 0) ? request_state : resp.tuples[k - 1].predicted_state;
        plan.push_back({expected, resp.tuples[k].action, resp.origin_step + k});
    }
    return plan;
}

StateVector round_to_float32(const StateVector& s) {
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = static_cast<double>(static_cast<float>(s[i]));
    return StateVector(std::move(v));
}

EdgeSession::EdgeSession(SpoConfig cfg, WeightMatrix weights, std::size_t d_s, std::size_t d_a, bool verify)
    : cfg_(cfg), weights_(std::move(weights)), d_s_(d_s), d_a_(d_a), verify_(verify) {
    require_dimension(weights_.size(), d_s_, "EdgeSession: weights");
    if (d_a_ == 0) throw DimensionError("EdgeSession: d_a must be >= 1");
}

void EdgeSession::deliver(const RolloutResponse& resp, std::uint64_t current_step) {
    tuples_received_ += resp.tuples.size();
    if (!in_flight_ || resp.request_id != latest_request_id_) {
        wasted_ += resp.tuples.size();
        return;
    }
    in_flight_ = false;
    ++received_;
    horizons_.push_back(resp.horizon_used);

    std::vector<SpeculativeTuple> plan = plan_from_rollout(request_state_, resp);
    if (hold_start_) {
        // The robot has been stationary since hold_start_: the entry planned
        // for that step is still valid, just late. Shift the plan so it
        // resumes now.
        const std::uint64_t h = *hold_start_;
        std::vector<SpeculativeTuple> shifted;
        for (auto& e : plan) {
            if (e.step_index < h) {
                ++wasted_;
                continue;
            }
            e.step_index = e.step_index - h + current_step;
            shifted.push_back(std::move(e));
        }
        plan = std::move(shifted);
        hold_start_.reset();
    }
    // entries for the current tick are still usable; anything earlier is stale
    InstallResult ir;
    if (current_step == 0) {
        ir.displaced = cache_.size();
        for (auto& e : plan) ir.cache.push_back(std::move(e));
    } else {
        ir = install_response(cache_, plan, current_step - 1);
    }
    wasted_ += ir.dropped_stale + ir.displaced;
    cache_ = std::move(ir.cache);
}

std::optional<RolloutRequest> EdgeSession::tick(std::uint64_t step, const StateVector& observed, double sim_time,
                                                StepRecord& record) {
    require_dimension(observed.size(), d_s_, "EdgeSession::tick: observed state");
    TickResult r = edge_tick(cache_, observed, step, sim_time, cfg_, weights_, d_a_, in_flight_, verify_);
    cache_ = std::move(r.cache);
    record = std::move(r.record);

    switch (record.outcome) {
        case StepOutcome::Hit:
        case StepOutcome::Direct: ++executed_; break;
        case StepOutcome::Miss: wasted_ += 1 + r.flushed; break;
        default: break;
    }

    if (r.request) {
        r.request->request_id = next_request_id_++;
        latest_request_id_ = r.request->request_id;
        request_state_ = round_to_float32(r.request->observed_state);
        in_flight_ = true;
        hold_start_.reset();
    }
    const bool holding = record.outcome == StepOutcome::Miss || record.outcome == StepOutcome::StarvedHold ||
                         record.outcome == StepOutcome::AwaitingRefill;
    if (holding && in_flight_ && !hold_start_) hold_start_ = step;
    return r.request;
}

}  // namespace spo
