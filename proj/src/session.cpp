#include "spo/session.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "spo/codec.hpp"
#include "spo/latency.hpp"

namespace spo {

std::string to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::Blocking: return "blocking";
        case BaselineKind::T1SC: return "t1sc";
        case BaselineKind::NFTC: return "nftc";
        case BaselineKind::SPO: return "spo";
    }
    return "unknown";
}

BaselineKind parse_baseline_kind(const std::string& name) {
    for (auto k : all_baseline_kinds())
        if (to_string(k) == name) return k;
    throw InvalidArgument(fmt::format("unknown kind `{}` (expected blocking|t1sc|nftc|spo)", name));
}

std::vector<BaselineKind> all_baseline_kinds() {
    return {BaselineKind::Blocking, BaselineKind::T1SC, BaselineKind::NFTC, BaselineKind::SPO};
}

int nominal_horizon(BaselineKind k) {
    switch (k) {
        case BaselineKind::Blocking: return 0;
        case BaselineKind::T1SC: return 1;
        case BaselineKind::NFTC: return 10;
        case BaselineKind::SPO: return -1;
    }
    return -1;
}

AhsState horizon_controller(BaselineKind k, const SpoConfig& cfg) {
    switch (k) {
        case BaselineKind::Blocking: return AhsState::fixed(1);
        case BaselineKind::T1SC: return AhsState::fixed(1);
        case BaselineKind::NFTC: return AhsState::fixed(10);
        case BaselineKind::SPO: return AhsState::from_config(cfg);
    }
    return AhsState::from_config(cfg);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), 0x5eedu};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

void tally_records(const std::vector<StepRecord>& records, double control_interval, RunMetrics& m) {
    m.hits = m.misses = m.holds = m.awaiting = m.direct = 0;
    for (const auto& r : records) {
        switch (r.outcome) {
            case StepOutcome::Hit: ++m.hits; break;
            case StepOutcome::Miss: ++m.misses; break;
            case StepOutcome::StarvedHold: ++m.holds; break;
            case StepOutcome::AwaitingRefill: ++m.awaiting; break;
            case StepOutcome::Direct: ++m.direct; break;
        }
    }
    m.steps_taken = records.size();
    m.sim_wall_time = static_cast<double>(m.steps_taken) * control_interval;
    m.idle_time = static_cast<double>(m.misses + m.holds + m.awaiting) * control_interval;
    m.hit_rate = static_cast<double>(m.hits) / static_cast<double>(std::max<std::uint64_t>(1, m.hits + m.misses + m.holds));
}

double verified_hit_rate(const std::vector<StepRecord>& records, std::uint64_t from_step) {
    std::uint64_t hits = 0, misses = 0;
    for (const auto& r : records) {
        if (r.step_index < from_step) continue;
        if (r.outcome == StepOutcome::Hit) ++hits;
        if (r.outcome == StepOutcome::Miss) ++misses;
    }
    return hits + misses == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(hits + misses);
}

namespace {

std::uint64_t tuples_in_frame(const Bytes& frame) {
    if (frame.size() < kFrameCommonBytes + kResponseHeaderBytes) return 0;
    return static_cast<std::uint64_t>(frame[kFrameCommonBytes] | (frame[kFrameCommonBytes + 1] << 8));
}

}  // namespace

RunResult run_virtual_session(const EnvironmentSpec& spec, const SpoConfig& cfg, const WeightMatrix& weights,
                              const SessionOptions& opts) {
    validate_config(cfg);
    validate_environment(spec);
    require_dimension(weights.size(), spec.d_s, "run_virtual_session: weights");

    EnvironmentSpec env = spec;
    env.control_interval = cfg.control_interval;

    RunResult result;
    RunMetrics& m = result.metrics;
    m.kind = to_string(opts.kind);
    m.seed = opts.seed;

    EdgeSession edge(cfg, weights, env.d_s, env.d_a, opts.kind != BaselineKind::Blocking);
    CloudSession cloud(std::make_unique<ExpertPolicy>(env),
                       make_world_model(env, opts.model, derive_seed(opts.seed, kModelStream)),
                       horizon_controller(opts.kind, cfg), cfg);
    VirtualChannel uplink(LatencyModel::from_config(cfg, derive_seed(opts.seed, kUplinkStream)));
    VirtualChannel downlink(LatencyModel::from_config(cfg, derive_seed(opts.seed, kDownlinkStream)));

    StateVector state = env.initial_state;
    const double dt = cfg.control_interval;

    try {
        for (std::uint64_t step = 0; step < static_cast<std::uint64_t>(env.max_steps); ++step) {
            if (is_success(env, state)) {
                m.success = true;
                break;
            }
            const double now = static_cast<double>(step) * dt;

            // cloud answers each request the moment it lands
            for (auto& tf : uplink.deliver(now)) {
                RolloutResponse resp = cloud.serve(decode_request(tf.frame));
                downlink.send(tf.deliver_at, encode_response(resp));
            }
            for (auto& tf : downlink.deliver(now)) {
                edge.deliver(decode_response(tf.frame, env.d_s, env.d_a), step);
            }

            StepRecord rec;
            if (auto req = edge.tick(step, state, now, rec)) uplink.send(now, encode_request(*req));
            state = true_step(env, state, rec.action_executed, step);
            result.records.push_back(std::move(rec));
        }
        if (!m.success && is_success(env, state)) m.success = true;
    } catch (const Error& e) {
        m.diagnostic = e.what();
    }

    tally_records(result.records, dt, m);
    m.subgoals_completed = stages_completed(env, state);
    result.granted_horizons = edge.granted_horizons();
    m.refills = result.granted_horizons.size();
    if (opts.kind == BaselineKind::Blocking) {
        m.mean_horizon = 0.0;
    } else if (!result.granted_horizons.empty()) {
        m.mean_horizon = std::accumulate(result.granted_horizons.begin(), result.granted_horizons.end(), 0.0) /
                         static_cast<double>(result.granted_horizons.size());
    }

    std::uint64_t in_flight = 0;
    for (const auto& tf : downlink.pending()) in_flight += tuples_in_frame(tf.frame);
    m.generated_predictions = cloud.generated();
    m.executed_predictions = edge.executed();
    m.wasted_predictions = edge.wasted();
    m.leftover_predictions = edge.cache().size() + in_flight;
    m.bytes_up = uplink.bytes_sent();
    m.bytes_down = downlink.bytes_sent();

    if (!opts.keep_records) result.records.clear();
    return result;
}

}  // namespace spo
