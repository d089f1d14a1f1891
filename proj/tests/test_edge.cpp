#include <random>

#include <doctest.h>

#include "spo/edge.hpp"

using namespace spo;

namespace {

SpeculativeTuple entry(std::vector<double> s, std::vector<double> a, std::uint64_t step) {
    return {StateVector(std::move(s)), ActionVector(std::move(a)), step};
}

std::vector<SpeculativeTuple> entries(std::uint64_t from, std::uint64_t to) {
    std::vector<SpeculativeTuple> out;
    for (auto k = from; k <= to; ++k) out.push_back(entry({static_cast<double>(k), 0.0}, {1.0}, k));
    return out;
}

TrajectoryCache cache_of(const std::vector<SpeculativeTuple>& es) {
    TrajectoryCache c;
    for (const auto& e : es) c.push_back(e);
    return c;
}

const SpoConfig kCfg{};
const WeightMatrix kId = WeightMatrix::identity(2);

}  // namespace

TEST_CASE("cache entries must be consecutive") {
    TrajectoryCache c;
    c.push_back(entry({0, 0}, {1}, 4));
    c.push_back(entry({0, 0}, {1}, 5));
    CHECK_THROWS_AS(c.push_back(entry({0, 0}, {1}, 7)), InvalidArgument);
    CHECK(c.pop_front().step_index == 4);
    CHECK(c.flush() == 1);
    CHECK(c.empty());
    CHECK_THROWS(c.pop_front());
}

TEST_CASE("zero-error head entry is a hit without a request") {
    auto c = cache_of({entry({1.0, 2.0}, {0.5}, 3)});
    auto r = edge_tick(c, StateVector({1.0, 2.0}), 3, 0.06, kCfg, kId, 1, false);
    CHECK(r.record.outcome == StepOutcome::Hit);
    CHECK(r.record.action_executed == ActionVector({0.5}));
    REQUIRE(r.record.error);
    CHECK(*r.record.error == 0.0);
    CHECK(r.cache.empty());
    CHECK(!r.request);
}

TEST_CASE("error beyond the tube flushes and requests a replan") {
    auto c = cache_of({entry({0.0, 0.0}, {0.5}, 3), entry({0.0, 0.0}, {0.5}, 4), entry({0.0, 0.0}, {0.5}, 5)});
    auto r = edge_tick(c, StateVector({15.0, 20.0}), 3, 0.06, kCfg, kId, 1, false);
    CHECK(r.record.outcome == StepOutcome::Miss);
    CHECK(r.record.action_executed.is_zero());
    CHECK(*r.record.error == 25.0);
    CHECK(r.cache.empty());
    CHECK(r.flushed == 2);
    REQUIRE(r.request);
    CHECK(r.request->violation_error == 25.0);
    CHECK(r.request->observed_state == StateVector({15.0, 20.0}));
}

TEST_CASE("empty cache holds and requests once") {
    TrajectoryCache c;
    auto r = edge_tick(c, StateVector({0.0, 0.0}), 9, 0.18, kCfg, kId, 1, false);
    CHECK(r.record.outcome == StepOutcome::StarvedHold);
    CHECK(r.record.action_executed.is_zero());
    REQUIRE(r.request);
    CHECK(r.request->violation_error == 0.0);
    CHECK(r.request->step_index == 9);

    r = edge_tick(c, StateVector({0.0, 0.0}), 10, 0.2, kCfg, kId, 1, true);
    CHECK(r.record.outcome == StepOutcome::AwaitingRefill);
    CHECK(r.record.action_executed.is_zero());
    CHECK(!r.request);
}

TEST_CASE("unverified mode executes the head entry directly") {
    auto c = cache_of({entry({0.0, 0.0}, {0.5}, 3)});
    auto r = edge_tick(c, StateVector({100.0, 0.0}), 3, 0.0, kCfg, kId, 1, false, false);
    CHECK(r.record.outcome == StepOutcome::Direct);
    CHECK(r.record.action_executed == ActionVector({0.5}));
    CHECK(!r.request);
}

TEST_CASE("prefetch watermark asks early after a hit") {
    SpoConfig cfg;
    cfg.prefetch_low_watermark = 2;
    auto c = cache_of({entry({0, 0}, {1}, 1), entry({0, 0}, {1}, 2)});
    auto r = edge_tick(c, StateVector({0.0, 0.0}), 1, 0.0, cfg, kId, 1, false);
    CHECK(r.record.outcome == StepOutcome::Hit);
    CHECK(r.request);
    r = edge_tick(c, StateVector({0.0, 0.0}), 1, 0.0, cfg, kId, 1, true);
    CHECK(!r.request);
}

TEST_CASE("installing a response drops entries that are already due or past") {
    auto fresh = install_response(TrajectoryCache{}, entries(11, 15), 10);
    CHECK(fresh.installed == 5);
    CHECK(fresh.dropped_stale == 0);

    auto late = install_response(TrajectoryCache{}, entries(11, 15), 13);
    CHECK(late.installed == 2);
    CHECK(late.dropped_stale == 3);
    REQUIRE(late.cache.size() == 2);
    CHECK(late.cache.entries()[0].step_index == 14);
    CHECK(late.cache.entries()[1].step_index == 15);

    auto replaced = install_response(cache_of(entries(11, 12)), entries(12, 14), 11);
    CHECK(replaced.displaced == 2);
    CHECK(replaced.installed == 3);
}

TEST_CASE("superseded responses are discarded") {
    RolloutResponse resp;
    resp.request_id = 7;
    resp.tuples = entries(11, 15);
    auto old = cache_of(entries(20, 21));
    auto r = install_response(old, resp, 10, 8);
    CHECK(r.installed == 0);
    CHECK(r.dropped_stale == 5);
    CHECK(r.cache.size() == 2);
    CHECK(r.cache.front().step_index == 20);
}

TEST_CASE("rollout tuples become entries keyed by the state they start from") {
    RolloutResponse resp;
    resp.origin_step = 5;
    resp.tuples = {entry({1, 0}, {0.1}, 6), entry({2, 0}, {0.2}, 7), entry({3, 0}, {0.3}, 8)};
    auto plan = plan_from_rollout(StateVector({0.0, 0.0}), resp);
    REQUIRE(plan.size() == 3);
    CHECK(plan[0].predicted_state == StateVector({0.0, 0.0}));
    CHECK(plan[0].action == ActionVector({0.1}));
    CHECK(plan[0].step_index == 5);
    CHECK(plan[2].predicted_state == StateVector({2.0, 0.0}));
    CHECK(plan[2].step_index == 7);
}

TEST_CASE("edge session rebases a plan that arrives during a hold") {
    EdgeSession edge(kCfg, kId, 2, 1);
    StepRecord rec;
    StateVector s({0.0, 0.0});
    auto req = edge.tick(0, s, 0.0, rec);
    REQUIRE(req);
    CHECK(edge.request_in_flight());
    for (int t = 1; t < 8; ++t) {
        CHECK(!edge.tick(t, s, 0.0, rec));
        CHECK(rec.outcome == StepOutcome::AwaitingRefill);
    }

    RolloutResponse resp;
    resp.request_id = req->request_id;
    resp.origin_step = 0;
    resp.horizon_used = 3;
    resp.tuples = {entry({1, 0}, {0.1}, 1), entry({2, 0}, {0.2}, 2), entry({3, 0}, {0.3}, 3)};
    edge.deliver(resp, 8);
    CHECK(!edge.request_in_flight());
    REQUIRE(edge.cache().size() == 3);
    CHECK(edge.cache().front().step_index == 8);
    CHECK(edge.wasted() == 0);

    edge.tick(8, s, 0.0, rec);
    CHECK(rec.outcome == StepOutcome::Hit);
    CHECK(rec.action_executed == ActionVector({0.1}));
    CHECK(edge.executed() == 1);
    CHECK(edge.granted_horizons() == std::vector<int>{3});
}

TEST_CASE("edge session discards responses to replaced requests") {
    EdgeSession edge(kCfg, kId, 2, 1);
    StepRecord rec;
    auto r1 = edge.tick(0, StateVector({0.0, 0.0}), 0.0, rec);
    REQUIRE(r1);
    RolloutResponse stale;
    stale.request_id = r1->request_id + 5;
    stale.tuples = entries(1, 4);
    edge.deliver(stale, 3);
    CHECK(edge.wasted() == 4);
    CHECK(edge.cache().empty());
    CHECK(edge.request_in_flight());
}

TEST_CASE("non-hit ticks always execute the zero action") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    std::uniform_int_distribution<int> len(0, 4);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 3000; ++trial) {
        std::vector<SpeculativeTuple> es;
        const int n = len(rng);
        for (int k = 0; k < n; ++k) es.push_back(entry({u(rng), u(rng)}, {u(rng) + 31.0}, 50 + k));
        auto r = edge_tick(cache_of(es), StateVector({u(rng), u(rng)}), 50, 1.0, kCfg, kId, 1, coin(rng));
        if (r.record.outcome == StepOutcome::Hit) {
            CHECK(*r.record.error <= kCfg.epsilon_base);
            CHECK(!r.record.action_executed.is_zero());
        } else {
            CHECK(r.record.action_executed.is_zero());
            if (r.record.outcome == StepOutcome::Miss) CHECK(*r.record.error > kCfg.epsilon_base);
            CHECK(r.cache.empty());
        }
    }
}
