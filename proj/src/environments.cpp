#include "spo/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace spo {

namespace {

bool has_stage(const EnvironmentSpec& spec) { return spec.dynamics != Dynamics::Integrator; }

std::vector<double> waypoint(std::size_t d_a, int j, double amplitude) {
    std::vector<double> w(d_a);
    for (std::size_t i = 0; i + 1 < d_a; ++i) {
        w[i] = amplitude * std::sin(1.3 * (j + 1) + 0.9 * static_cast<double>(i));
    }
    w[d_a - 1] = (j % 2 == 0) ? 1.0 : 0.0;  // gripper open / closed
    return w;
}

EnvironmentSpec make_tracker(std::string name, Dynamics dynamics, std::size_t d_s, int n_waypoints,
                             double amplitude) {
    EnvironmentSpec spec;
    spec.name = std::move(name);
    spec.dynamics = dynamics;
    spec.d_a = 8;
    spec.d_s = d_s;

    std::vector<double> s0(d_s, 0.0);
    for (std::size_t i = spec.d_a + 1; i < d_s; ++i) s0[i] = 0.25 * std::sin(0.7 * static_cast<double>(i));
    spec.initial_state = StateVector(s0);

    for (int j = 0; j < n_waypoints; ++j) spec.waypoints.push_back(waypoint(spec.d_a, j, amplitude));

    std::vector<double> goal = s0;
    std::copy(spec.waypoints.back().begin(), spec.waypoints.back().end(), goal.begin());
    goal[spec.d_a] = n_waypoints;
    spec.goal_center = StateVector(goal);
    spec.goal_weights.assign(d_s, 0.0);
    std::fill(spec.goal_weights.begin(), spec.goal_weights.begin() + static_cast<long>(spec.d_a) + 1, 1.0);
    return spec;
}

StateVector offset_on(std::size_t d_s, std::vector<std::pair<std::size_t, double>> entries) {
    std::vector<double> v(d_s, 0.0);
    for (auto [i, x] : entries) v[i] = x;
    return StateVector(v);
}

}  // namespace

std::string to_string(Dynamics d) {
    switch (d) {
        case Dynamics::Integrator: return "integrator";
        case Dynamics::WaypointTracker: return "waypoint_tracker";
        case Dynamics::ContactScripted: return "contact_scripted";
    }
    return "unknown";
}

std::size_t stage_index(const EnvironmentSpec& spec) { return has_stage(spec) ? spec.d_a : spec.d_s; }

int stages_completed(const EnvironmentSpec& spec, const StateVector& state) {
    if (!has_stage(spec)) return 0;
    return static_cast<int>(std::lround(state[spec.d_a]));
}

void validate_environment(const EnvironmentSpec& spec) {
    if (spec.d_s == 0 || spec.d_a == 0) throw DimensionError("environment dimensions must be >= 1");
    if (spec.dynamics == Dynamics::Integrator && spec.d_s < 2 * spec.d_a)
        throw DimensionError("integrator needs d_s >= 2 d_a");
    if (has_stage(spec) && spec.d_s < spec.d_a + 1)
        throw DimensionError("waypoint dynamics needs d_s >= d_a + 1");
    if (has_stage(spec) && spec.waypoints.empty())
        throw InvalidArgument("waypoint dynamics needs at least one waypoint");
    if (spec.max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
    if (!(spec.control_interval > 0.0)) throw InvalidArgument("control_interval must be positive");
    require_dimension(spec.initial_state.size(), spec.d_s, "initial_state");
    require_dimension(spec.goal_center.size(), spec.d_s, "goal_center");
    require_dimension(spec.goal_weights.size(), spec.d_s, "goal_weights");
    for (double g : spec.goal_weights)
        if (!(g >= 0.0)) throw InvalidArgument("goal weights must be nonnegative");
    if (!(spec.goal_radius >= 0.0)) throw InvalidArgument("goal_radius must be nonnegative");
    for (const auto& w : spec.waypoints) require_dimension(w.size(), spec.d_a, "waypoint");
    for (std::size_t i = 0; i < spec.disturbances.size(); ++i) {
        require_dimension(spec.disturbances[i].offset.size(), spec.d_s, "disturbance offset");
        if (i > 0 && spec.disturbances[i].step_index <= spec.disturbances[i - 1].step_index)
            throw InvalidArgument("disturbance step indices must be strictly increasing");
    }
}

SpoConfig with_environment_defaults(SpoConfig cfg, const EnvironmentSpec& spec, bool epsilon_explicit) {
    if (!epsilon_explicit && spec.recommended_epsilon > 0.0) cfg.epsilon_base = spec.recommended_epsilon;
    return cfg;
}

StateVector nominal_step(const EnvironmentSpec& spec, const StateVector& state, const ActionVector& action) {
    require_dimension(state.size(), spec.d_s, "true_step: state");
    require_dimension(action.size(), spec.d_a, "true_step: action");

    std::vector<double> next = state.vec();
    const double dt = spec.control_interval;

    double scale = 1.0;
    if (spec.dynamics == Dynamics::ContactScripted) {
        const int stage = stages_completed(spec, state);
        if (std::find(spec.contact_stages.begin(), spec.contact_stages.end(), stage) != spec.contact_stages.end())
            scale = spec.contact_damping;
    }
    for (std::size_t i = 0; i < spec.d_a; ++i) next[i] += scale * action[i] * dt;

    if (spec.dynamics == Dynamics::Integrator) {
        for (std::size_t i = 0; i < spec.d_a; ++i) next[spec.d_a + i] = action[i];
    } else {
        const auto stage = static_cast<std::size_t>(std::max(0, stages_completed(spec, state)));
        if (stage < spec.waypoints.size()) {
            const auto& wp = spec.waypoints[stage];
            double worst = 0.0;
            for (std::size_t i = 0; i < spec.d_a; ++i) worst = std::max(worst, std::abs(next[i] - wp[i]));
            if (worst <= spec.reach_tolerance) next[spec.d_a] = static_cast<double>(stage + 1);
        }
    }
    return StateVector(std::move(next));
}

StateVector true_step(const EnvironmentSpec& spec, const StateVector& state, const ActionVector& action,
                      std::uint64_t step_index) {
    StateVector next = nominal_step(spec, state, action);
    auto it = std::lower_bound(spec.disturbances.begin(), spec.disturbances.end(), step_index,
                               [](const Disturbance& d, std::uint64_t s) { return d.step_index < s; });
    if (it == spec.disturbances.end() || it->step_index != step_index) return next;

    std::vector<double> v = next.vec();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += it->offset[i];
    return StateVector(std::move(v));
}

bool is_success(const EnvironmentSpec& spec, const StateVector& state) {
    require_dimension(state.size(), spec.d_s, "is_success: state");
    double sum = 0.0;
    for (std::size_t i = 0; i < spec.d_s; ++i) {
        const double d = state[i] - spec.goal_center[i];
        sum += spec.goal_weights[i] * d * d;
    }
    return std::sqrt(sum) <= spec.goal_radius;
}

ActionVector expert_action(const EnvironmentSpec& spec, const StateVector& state) {
    require_dimension(state.size(), spec.d_s, "expert_action: state");
    if (spec.waypoints.empty()) return zero_action(spec.d_a);

    std::size_t stage = spec.waypoints.size() - 1;
    if (has_stage(spec)) {
        stage = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, stages_completed(spec, state))),
                                      spec.waypoints.size() - 1);
    }
    const auto& target = spec.waypoints[stage];
    std::vector<double> a(spec.d_a);
    for (std::size_t i = 0; i < spec.d_a; ++i) {
        a[i] = std::clamp(spec.gain * (target[i] - state[i]), -spec.max_speed, spec.max_speed);
    }
    return ActionVector(std::move(a));
}

std::vector<std::string> canonical_environment_names() { return {"free_space", "tight_tolerance", "multi_stage"}; }

EnvironmentSpec make_environment(const std::string& name) {
    if (name == "free_space") {
        auto spec = make_tracker(name, Dynamics::WaypointTracker, 148, 2, 0.6);
        spec.max_steps = 2500;
        spec.goal_radius = 0.05;
        spec.reach_tolerance = 0.02;
        validate_environment(spec);
        return spec;
    }
    if (name == "tight_tolerance") {
        auto spec = make_tracker(name, Dynamics::WaypointTracker, 141, 3, 0.5);
        spec.max_steps = 4000;
        spec.goal_radius = 0.005;
        spec.reach_tolerance = 0.005;
        spec.recommended_epsilon = 8.0;
        validate_environment(spec);
        return spec;
    }
    if (name == "multi_stage") {
        auto spec = make_tracker(name, Dynamics::ContactScripted, 295, 7, 0.6);
        spec.max_steps = 10000;
        spec.goal_radius = 0.02;
        spec.reach_tolerance = 0.01;
        spec.contact_stages = {1, 3, 5};
        spec.contact_damping = 0.5;
        const std::size_t obj = spec.d_a + 1;
        spec.disturbances = {
            {80, offset_on(spec.d_s, {{obj + 3, 0.05}})},
            {240, offset_on(spec.d_s, {{1, 0.08}, {obj + 10, -0.04}})},
            {420, offset_on(spec.d_s, {{obj + 20, 0.06}})},
            {650, offset_on(spec.d_s, {{3, -0.08}})},
            {900, offset_on(spec.d_s, {{obj + 40, 0.05}, {5, 0.05}})},
        };
        validate_environment(spec);
        return spec;
    }
    throw InvalidArgument(fmt::format("unknown environment `{}`", name));
}

EnvironmentSpec make_integrator(std::size_t d_a, double control_interval, std::vector<double> target) {
    EnvironmentSpec spec;
    spec.name = "integrator";
    spec.dynamics = Dynamics::Integrator;
    spec.d_a = d_a;
    spec.d_s = 2 * d_a;
    spec.control_interval = control_interval;
    spec.max_steps = 1000;
    spec.initial_state = StateVector(std::vector<double>(spec.d_s, 0.0));
    std::vector<double> goal(spec.d_s, 0.0);
    if (!target.empty()) {
        require_dimension(target.size(), d_a, "integrator target");
        std::copy(target.begin(), target.end(), goal.begin());
        spec.waypoints.push_back(std::move(target));
    }
    spec.goal_center = StateVector(goal);
    spec.goal_weights.assign(spec.d_s, 0.0);
    std::fill(spec.goal_weights.begin(), spec.goal_weights.begin() + static_cast<long>(d_a), 1.0);
    validate_environment(spec);
    return spec;
}

std::vector<Disturbance> parse_disturbance_csv(const std::string& text, std::size_t d_s) {
    std::vector<Disturbance> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line_no == 1 && line.find("step") != std::string::npos) continue;  // header

        std::istringstream row(line);
        std::string f0, f1, f2;
        if (!std::getline(row, f0, ',') || !std::getline(row, f1, ',') || !std::getline(row, f2))
            throw InvalidArgument(fmt::format("disturbance csv line {}: expected step_index,dim,offset", line_no));
        const auto step = static_cast<std::uint64_t>(parse_int("step_index", f0));
        const auto dim = static_cast<std::size_t>(parse_int("dim", f1));
        const double offset = parse_double("offset", f2);
        if (dim >= d_s) throw DimensionError(fmt::format("disturbance csv line {}: dim {} >= d_s {}", line_no, dim, d_s));

        if (out.empty() || out.back().step_index != step) {
            if (!out.empty() && step < out.back().step_index)
                throw InvalidArgument(fmt::format("disturbance csv line {}: steps must be nondecreasing", line_no));
            out.push_back({step, StateVector(std::vector<double>(d_s, 0.0))});
        }
        std::vector<double> v = out.back().offset.vec();
        v[dim] += offset;
        out.back().offset = StateVector(std::move(v));
    }
    return out;
}

std::vector<Disturbance> load_disturbance_csv(const std::filesystem::path& path, std::size_t d_s) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open disturbance csv " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_disturbance_csv(ss.str(), d_s);
}

EnvironmentSpec environment_from_key_values(const KeyValues& kv, const std::string& fallback_name) {
    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    EnvironmentSpec spec = make_environment(get("env") ? *get("env") : fallback_name);
    if (auto* v = get("env.max_steps")) spec.max_steps = static_cast<int>(parse_int("env.max_steps", *v));
    if (auto* v = get("env.goal_radius")) spec.goal_radius = parse_double("env.goal_radius", *v);
    if (auto* v = get("env.reach_tolerance")) spec.reach_tolerance = parse_double("env.reach_tolerance", *v);
    if (auto* v = get("env.max_speed")) spec.max_speed = parse_double("env.max_speed", *v);
    if (auto* v = get("env.disturbances")) spec.disturbances = load_disturbance_csv(*v, spec.d_s);
    validate_environment(spec);
    return spec;
}

}  // namespace spo
