#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "spo/ahs.hpp"

using namespace spo;

namespace {

AhsState at(int k, double pending = 0.0) {
    AhsState s = AhsState::initial(2, 10, 1);
    s.horizon = k;
    s.pending_violation = pending;
    return s;
}

}  // namespace

TEST_CASE("recording a violation stores the latest error only") {
    auto s = record_violation(at(5), 25.0);
    CHECK(s.horizon == 5);
    CHECK(s.pending_violation == 25.0);

    s = record_violation(at(10, 25.0), 40.0);
    CHECK(s.horizon == 10);
    CHECK(s.pending_violation == 40.0);

    s = record_violation(at(2), 20.5);
    CHECK(s.horizon == 2);
    CHECK(s.pending_violation == 20.5);

    CHECK_THROWS_AS(record_violation(at(2), 0.0), InvalidArgument);
    CHECK_THROWS_AS(record_violation(at(2), -1.0), InvalidArgument);
    CHECK_THROWS_AS(record_violation(at(2), std::nan("")), InvalidArgument);
}

TEST_CASE("horizon update examples") {
    CHECK(update_horizon(at(5), 20.0).horizon == 6);
    CHECK(update_horizon(at(8, 40.0), 20.0).horizon == 4);
    CHECK(update_horizon(at(3, 60.0), 20.0).horizon == 2);
    CHECK(update_horizon(at(10), 20.0).horizon == 10);

    auto s = update_horizon(at(8, 40.0), 20.0);
    CHECK(s.pending_violation == 0.0);
}

TEST_CASE("update does not mutate its argument") {
    const AhsState s = at(8, 40.0);
    auto t = update_horizon(s, 20.0);
    CHECK(s.horizon == 8);
    CHECK(s.pending_violation == 40.0);
    CHECK(t != s);
}

TEST_CASE("a ratio at or below one is still clamped to k_max") {
    CHECK(update_horizon(at(8, 10.0), 20.0).horizon == 10);
    CHECK(update_horizon(at(4, 20.0), 20.0).horizon == 4);
}

TEST_CASE("growth from k_min reaches k_max in (k_max - k_min) / beta updates") {
    for (int beta : {1, 2, 3}) {
        AhsState s = AhsState::initial(2, 10, beta);
        int updates = 0;
        while (s.horizon < 10) {
            s = update_horizon(s, 20.0);
            ++updates;
        }
        CHECK(updates == (10 - 2 + beta - 1) / beta);
    }
}

TEST_CASE("fuzzed sequences keep the horizon within bounds") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> kmin_d(1, 6), span_d(0, 12), beta_d(1, 4), len_d(1, 20);
    std::uniform_real_distribution<double> eps_d(0.5, 50.0), ratio_d(0.2, 12.0), coin(0.0, 1.0);
    for (int seq = 0; seq < 100000; ++seq) {
        const int k_min = kmin_d(rng);
        const int k_max = k_min + span_d(rng);
        AhsState s = AhsState::initial(k_min, k_max, beta_d(rng));
        const double eps = eps_d(rng);
        const int len = len_d(rng);
        for (int i = 0; i < len; ++i) {
            if (coin(rng) < 0.4) s = record_violation(s, eps * ratio_d(rng));
            s = update_horizon(s, eps);
            REQUIRE(s.horizon >= k_min);
            REQUIRE(s.horizon <= k_max);
            REQUIRE(s.pending_violation == 0.0);
        }
    }
}

TEST_CASE("larger violations never give a larger horizon") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> k_d(2, 10);
    std::uniform_real_distribution<double> e_d(20.0001, 400.0);
    for (int i = 0; i < 20000; ++i) {
        const int k = k_d(rng);
        double e1 = e_d(rng), e2 = e_d(rng);
        if (e1 > e2) std::swap(e1, e2);
        const int h1 = update_horizon(record_violation(at(k), e1), 20.0).horizon;
        const int h2 = update_horizon(record_violation(at(k), e2), 20.0).horizon;
        CHECK(h2 <= h1);
        CHECK(h1 <= k);
    }
}

TEST_CASE("fixed controllers never move") {
    AhsState s = AhsState::fixed(10);
    s = update_horizon(record_violation(s, 400.0), 20.0);
    CHECK(s.horizon == 10);
    s = update_horizon(AhsState::fixed(1), 20.0);
    CHECK(s.horizon == 1);
}
