#include "spo/cloud.hpp"

#include <fmt/format.h>

namespace spo {

DriftedWorldModel::DriftedWorldModel(EnvironmentSpec spec, double bias, double noise_std, std::uint64_t seed)
    : spec_(std::move(spec)), bias_(bias), noise_std_(noise_std), rng_(seed) {
    if (!(noise_std_ >= 0.0)) throw InvalidArgument("drift noise must be nonnegative");
}

StateVector DriftedWorldModel::step(const StateVector& state, const ActionVector& action) {
    std::vector<double> next = nominal_step(spec_, state, action).vec();
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < spec_.d_a; ++i) {
        next[i] += bias_ * action[i] / spec_.max_speed;
        if (noise_std_ > 0.0) next[i] += noise_std_ * noise(rng_);
    }
    return StateVector(std::move(next));
}

std::string to_string(ModelOptions::Kind k) { return k == ModelOptions::Kind::Oracle ? "oracle" : "drifted"; }

ModelOptions::Kind parse_model_kind(const std::string& name) {
    if (name == "oracle") return ModelOptions::Kind::Oracle;
    if (name == "drifted") return ModelOptions::Kind::Drifted;
    throw InvalidArgument(fmt::format("unknown model `{}` (expected oracle|drifted)", name));
}

std::unique_ptr<WorldModel> make_world_model(const EnvironmentSpec& spec, const ModelOptions& opts,
                                             std::uint64_t seed) {
    if (opts.kind == ModelOptions::Kind::Oracle) return std::make_unique<OracleWorldModel>(spec);
    return std::make_unique<DriftedWorldModel>(spec, opts.drift_bias, opts.drift_noise, seed);
}

std::vector<SpeculativeTuple> speculative_rollout(const StateVector& start, int horizon, Policy& policy,
                                                  WorldModel& model, std::uint64_t origin_step) {
    if (horizon < 1) throw RolloutError(fmt::format("rollout horizon must be >= 1, got {}", horizon));
    const std::size_t d_s = start.size();

    std::vector<SpeculativeTuple> out;
    out.reserve(static_cast<std::size_t>(horizon));
    StateVector current = start;
    for (int k = 1; k <= horizon; ++k) {
        ActionVector action;
        StateVector next;
        try {
            action = policy.act(current);
            next = model.step(current, action);
        } catch (const InvalidArgument& e) {
            throw RolloutError(fmt::format("world model produced a non-finite prediction at depth {}: {}", k, e.what()));
        } catch (const DimensionError& e) {
            throw RolloutError(fmt::format("dimension mismatch at depth {}: {}", k, e.what()));
        }
        if (next.size() != d_s)
            throw RolloutError(fmt::format("world model returned dimension {} at depth {}, expected {}", next.size(), k, d_s));
        out.push_back({next, action, origin_step + static_cast<std::uint64_t>(k)});
        current = std::move(next);
    }
    return out;
}

std::pair<RolloutResponse, AhsState> handle_request(const RolloutRequest& req, const AhsState& ahs,
                                                    const SpoConfig& cfg, Policy& policy, WorldModel& model) {
    if (!(req.violation_error >= 0.0)) throw InvalidArgument("request violation_error must be nonnegative");

    AhsState next = ahs;
    if (req.violation_error > 0.0) next = record_violation(next, req.violation_error);
    next = update_horizon(next, cfg.epsilon_base);

    RolloutResponse resp;
    resp.request_id = req.request_id;
    resp.origin_step = req.step_index;
    resp.horizon_used = next.horizon;
    resp.tuples = speculative_rollout(req.observed_state, next.horizon, policy, model, req.step_index);
    return {std::move(resp), next};
}

CloudSession::CloudSession(std::unique_ptr<Policy> policy, std::unique_ptr<WorldModel> model, AhsState ahs,
                           SpoConfig cfg)
    : policy_(std::move(policy)), model_(std::move(model)), ahs_(ahs), cfg_(cfg) {}

RolloutResponse CloudSession::serve(const RolloutRequest& req) {
    auto [resp, next] = handle_request(req, ahs_, cfg_, *policy_, *model_);
    ahs_ = next;
    generated_ += resp.tuples.size();
    return std::move(resp);
}

}  // namespace spo
