#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spo/config.hpp"
#include "spo/types.hpp"

namespace spo {

// State layout shared by all dynamics:
//   [0, d_a)              joint / gripper positions, integrated from the action
//   Integrator:           [d_a, 2 d_a) echo of the last action
//   WaypointTracker and
//   ContactScripted:      [d_a] stage index (number of waypoints reached)
//   remainder             object pose components, static unless disturbed
enum class Dynamics { Integrator, WaypointTracker, ContactScripted };

struct Disturbance {
    std::uint64_t step_index = 0;
    StateVector offset;
};

struct EnvironmentSpec {
    std::string name;
    Dynamics dynamics = Dynamics::WaypointTracker;
    std::size_t d_s = 0;
    std::size_t d_a = 0;
    double control_interval = 0.02;
    int max_steps = 600;

    StateVector initial_state;

    // Scripted expert
    std::vector<std::vector<double>> waypoints;  // each of length d_a
    double reach_tolerance = 0.01;
    double gain = 25.0;       // proportional gain, 1/s
    double max_speed = 1.0;   // per-joint velocity limit

    // ContactScripted: motion is scaled by contact_damping while the stage
    // index is one of contact_stages.
    std::vector<int> contact_stages;
    double contact_damping = 1.0;

    std::vector<Disturbance> disturbances;  // strictly increasing step_index

    StateVector goal_center;
    std::vector<double> goal_weights;  // nonnegative; 0 ignores a component
    double goal_radius = 0.05;

    // Tube radius suited to the task geometry; 0 leaves the configured one.
    double recommended_epsilon = 0.0;
};

/// cfg with epsilon_base replaced by spec.recommended_epsilon, when the
/// environment has one and the caller did not set epsilon explicitly.
SpoConfig with_environment_defaults(SpoConfig cfg, const EnvironmentSpec& spec, bool epsilon_explicit = false);

/// Throws InvalidArgument / DimensionError describing the first problem found.
void validate_environment(const EnvironmentSpec& spec);

/// Index of the stage component, or d_s when the dynamics has none.
std::size_t stage_index(const EnvironmentSpec& spec);

/// Number of waypoints reached in `state` (0 for Integrator).
int stages_completed(const EnvironmentSpec& spec, const StateVector& state);

/// s_{t+1} = T(s_t, a_t). The disturbance scheduled at step_index, if any,
/// is added to the returned state, so it is first observed at step_index + 1.
StateVector true_step(const EnvironmentSpec& spec, const StateVector& state, const ActionVector& action,
                      std::uint64_t step_index);

/// Same transition without the disturbance schedule (what a perfect world
/// model can know ahead of time).
StateVector nominal_step(const EnvironmentSpec& spec, const StateVector& state, const ActionVector& action);

/// Weighted distance to the goal centre within goal_radius (inclusive).
bool is_success(const EnvironmentSpec& spec, const StateVector& state);

/// Scripted expert: saturated proportional tracking of the current waypoint.
ActionVector expert_action(const EnvironmentSpec& spec, const StateVector& state);

// Canonical environments: "free_space", "tight_tolerance", "multi_stage".
std::vector<std::string> canonical_environment_names();
EnvironmentSpec make_environment(const std::string& name);

/// 1-D style integrator: d_s = 2 d_a (positions, action echo), origin start.
EnvironmentSpec make_integrator(std::size_t d_a, double control_interval, std::vector<double> target = {});

/// CSV rows `step_index,dim,offset` (optional header); rows with the same
/// step are merged into one offset vector.
std::vector<Disturbance> load_disturbance_csv(const std::filesystem::path& path, std::size_t d_s);
std::vector<Disturbance> parse_disturbance_csv(const std::string& text, std::size_t d_s);

/// `env = <canonical name>` plus optional overrides (env.max_steps,
/// env.goal_radius, env.reach_tolerance, env.max_speed, env.disturbances).
/// Returns the canonical spec unchanged when no env keys are present.
EnvironmentSpec environment_from_key_values(const KeyValues& kv, const std::string& fallback_name);

std::string to_string(Dynamics d);

}  // namespace spo
