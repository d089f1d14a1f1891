#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "spo/ahs.hpp"
#include "spo/config.hpp"
#include "spo/environments.hpp"
#include "spo/types.hpp"

namespace spo {

class RolloutError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Pluggable models
// ---------------------------------------------------------------------------

class Policy {
public:
    virtual ~Policy() = default;
    virtual ActionVector act(const StateVector& state) = 0;
};

class WorldModel {
public:
    virtual ~WorldModel() = default;
    virtual StateVector step(const StateVector& state, const ActionVector& action) = 0;
};

/// Scripted waypoint expert of the environment; replans from whatever state
/// it is given.
class ExpertPolicy final : public Policy {
public:
    explicit ExpertPolicy(EnvironmentSpec spec) : spec_(std::move(spec)) {}
    ActionVector act(const StateVector& state) override { return expert_action(spec_, state); }

private:
    EnvironmentSpec spec_;
};

/// Exact nominal dynamics of the environment. Scheduled disturbances are
/// not visible to it.
class OracleWorldModel final : public WorldModel {
public:
    explicit OracleWorldModel(EnvironmentSpec spec) : spec_(std::move(spec)) {}
    StateVector step(const StateVector& state, const ActionVector& action) override {
        return nominal_step(spec_, state, action);
    }

private:
    EnvironmentSpec spec_;
};

/// Nominal dynamics plus a per-step bias and seeded Gaussian noise on the
/// position components. The bias is `bias` at full commanded speed and
/// scales with the action (bias * a_i / max_speed), so a resting arm is
/// predicted to stay put. Stands in for a learned model of modest accuracy.
class DriftedWorldModel final : public WorldModel {
public:
    DriftedWorldModel(EnvironmentSpec spec, double bias, double noise_std, std::uint64_t seed);
    StateVector step(const StateVector& state, const ActionVector& action) override;

private:
    EnvironmentSpec spec_;
    double bias_;
    double noise_std_;
    std::mt19937_64 rng_;
};

struct ModelOptions {
    enum class Kind { Oracle, Drifted };
    Kind kind = Kind::Oracle;
    double drift_bias = 0.0;
    double drift_noise = 0.0;

    static ModelOptions oracle() { return {}; }
    /// The drift level used by the benchmark comparisons.
    static ModelOptions drifted(double bias = -0.008, double noise = 0.0005) { return {Kind::Drifted, bias, noise}; }
};

std::string to_string(ModelOptions::Kind k);
ModelOptions::Kind parse_model_kind(const std::string& name);

std::unique_ptr<WorldModel> make_world_model(const EnvironmentSpec& spec, const ModelOptions& opts,
                                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Rollout protocol
// ---------------------------------------------------------------------------

struct RolloutRequest {
    std::uint32_t request_id = 0;
    StateVector observed_state;     // s_t
    double violation_error = 0.0;   // e_miss, 0 when the refill is not caused by a miss
    std::uint64_t step_index = 0;   // t
};

struct RolloutResponse {
    std::uint32_t request_id = 0;
    std::uint64_t origin_step = 0;          // request.step_index
    std::vector<SpeculativeTuple> tuples;   // tuples[k].step_index = origin_step + k + 1
    int horizon_used = 0;
};

/// Autoregressive K-step rollout from `start`:
///   a_k = policy(s_k), s_{k+1} = model(s_k, a_k), s_1 = start,
/// returning (s_{k+1}, a_k) tagged with step origin_step + k.
/// Throws RolloutError on dimension mismatch or a non-finite prediction.
std::vector<SpeculativeTuple> speculative_rollout(const StateVector& start, int horizon, Policy& policy,
                                                  WorldModel& model, std::uint64_t origin_step = 0);

/// Applies the AHS update for this refill, then rolls out the new horizon.
std::pair<RolloutResponse, AhsState> handle_request(const RolloutRequest& req, const AhsState& ahs,
                                                    const SpoConfig& cfg, Policy& policy, WorldModel& model);

/// One edge session as seen by the cloud: models, seeds and the single
/// authoritative AhsState.
class CloudSession {
public:
    CloudSession(std::unique_ptr<Policy> policy, std::unique_ptr<WorldModel> model, AhsState ahs, SpoConfig cfg);

    RolloutResponse serve(const RolloutRequest& req);

    const AhsState& ahs() const noexcept { return ahs_; }
    std::uint64_t generated() const noexcept { return generated_; }

private:
    std::unique_ptr<Policy> policy_;
    std::unique_ptr<WorldModel> model_;
    AhsState ahs_;
    SpoConfig cfg_;
    std::uint64_t generated_ = 0;
};

}  // namespace spo
