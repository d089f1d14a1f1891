#include <cmath>

#include <doctest.h>

#include "spo/environments.hpp"
#include "spo/verifier.hpp"

using namespace spo;

TEST_CASE("integrator steps by a dt and echoes the action") {
    auto env = make_integrator(1, 0.02);
    auto next = true_step(env, StateVector({0.0, 0.0}), ActionVector({1.0}), 0);
    CHECK(next[0] == doctest::Approx(0.02));
    CHECK(next[1] == 1.0);
}

TEST_CASE("zero action holds positions in every canonical environment") {
    for (const auto& name : canonical_environment_names()) {
        auto env = make_environment(name);
        CHECK(env.d_a == 8);
        auto s = env.initial_state;
        auto next = nominal_step(env, s, zero_action(env.d_a));
        for (std::size_t i = 0; i < env.d_s; ++i) CHECK(next[i] == s[i]);
    }
}

TEST_CASE("canonical dimensions") {
    CHECK(make_environment("free_space").d_s == 148);
    CHECK(make_environment("tight_tolerance").d_s == 141);
    CHECK(make_environment("multi_stage").d_s == 295);
    CHECK_THROWS_AS(make_environment("nowhere"), InvalidArgument);
}

TEST_CASE("a scheduled disturbance appears in the next state and leaves the tube") {
    auto env = make_integrator(1, 0.02);
    std::vector<double> off{5.0, 0.0};
    env.disturbances = {{100, StateVector(off)}};
    validate_environment(env);

    StateVector s({0.0, 0.0});
    auto clean = true_step(env, s, zero_action(1), 99);
    auto hit = true_step(env, s, zero_action(1), 100);
    CHECK(clean[0] == 0.0);
    CHECK(hit[0] == 5.0);

    // with w = 20 on the position the offset weighs sqrt(20) * 5 > 20
    WeightMatrix w({20.0, 1.0});
    CHECK(std::sqrt(20.0) * 5.0 > 20.0);
    auto v = verify(hit, SpeculativeTuple{clean, zero_action(1), 101}, w, 20.0);
    CHECK(v.decision == Decision::Miss);
}

TEST_CASE("goal test is inclusive at the radius") {
    auto env = make_integrator(2, 0.02, {1.0, 0.0});
    env.goal_radius = 0.5;
    CHECK(is_success(env, StateVector({1.0, 0.0, 0.0, 0.0})));
    CHECK(is_success(env, StateVector({1.5, 0.0, 7.0, -3.0})));
    CHECK(!is_success(env, StateVector({1.5 + 1e-9, 0.0, 0.0, 0.0})));
    CHECK(!is_success(env, StateVector({9.0, 9.0, 0.0, 0.0})));
}

TEST_CASE("expert saturates and targets the current waypoint") {
    auto env = make_environment("free_space");
    auto a = expert_action(env, env.initial_state);
    for (double x : a.values()) CHECK(std::abs(x) <= env.max_speed);
}

TEST_CASE("waypoint stages advance under the expert") {
    auto env = make_environment("multi_stage");
    auto s = env.initial_state;
    int stage = 0;
    for (int t = 0; t < env.max_steps && !is_success(env, s); ++t) {
        s = nominal_step(env, s, expert_action(env, s));
        const int now = stages_completed(env, s);
        CHECK(now >= stage);
        stage = now;
    }
    CHECK(is_success(env, s));
    CHECK(stage == static_cast<int>(env.waypoints.size()));
}

TEST_CASE("validation rejects malformed specs") {
    auto env = make_integrator(1, 0.02);
    env.max_steps = 0;
    CHECK_THROWS(validate_environment(env));

    env = make_integrator(1, 0.02);
    env.disturbances = {{5, StateVector({1.0, 0.0})}, {5, StateVector({1.0, 0.0})}};
    CHECK_THROWS(validate_environment(env));

    env = make_integrator(1, 0.02);
    env.disturbances = {{5, StateVector({1.0})}};
    CHECK_THROWS(validate_environment(env));
}

TEST_CASE("disturbance CSV rows merge per step") {
    auto d = parse_disturbance_csv("step,dim,offset\n10,0,0.5\n10,2,-1\n30,1,2\n", 3);
    REQUIRE(d.size() == 2);
    CHECK(d[0].step_index == 10);
    CHECK(d[0].offset[0] == 0.5);
    CHECK(d[0].offset[2] == -1.0);
    CHECK(d[1].step_index == 30);
    CHECK(d[1].offset[1] == 2.0);
    CHECK_THROWS(parse_disturbance_csv("10,5,1\n", 3));
    CHECK_THROWS(parse_disturbance_csv("10,x,1\n", 3));
}

TEST_CASE("environment overrides from key values") {
    auto env = environment_from_key_values({{"env", "tight_tolerance"}, {"env.max_steps", "77"}}, "free_space");
    CHECK(env.name == "tight_tolerance");
    CHECK(env.max_steps == 77);
    CHECK(environment_from_key_values({}, "free_space").name == "free_space");
}

TEST_CASE("recommended tube radius applies only when not set explicitly") {
    SpoConfig cfg;
    auto tight = make_environment("tight_tolerance");
    auto free = make_environment("free_space");
    CHECK(with_environment_defaults(cfg, tight).epsilon_base == tight.recommended_epsilon);
    CHECK(with_environment_defaults(cfg, tight, true).epsilon_base == 20.0);
    CHECK(with_environment_defaults(cfg, free).epsilon_base == 20.0);
}
