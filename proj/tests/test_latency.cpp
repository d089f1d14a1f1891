#include <doctest.h>

#include "spo/latency.hpp"

using namespace spo;

TEST_CASE("degenerate latency distributions") {
    LatencyModel fixed(0.075, 0.0, 1);
    for (int i = 0; i < 10; ++i) CHECK(fixed.sample() == 0.075);
    LatencyModel none(0.0, 0.0, 1);
    CHECK(none.sample() == 0.0);
}

TEST_CASE("config splits the round trip per direction") {
    SpoConfig cfg;
    auto m = LatencyModel::from_config(cfg, 1);
    CHECK(m.base() == doctest::Approx(0.075));
    CHECK(m.jitter() == doctest::Approx(0.015));
}

TEST_CASE("uniform jitter: bounds and mean") {
    LatencyModel m(0.075, 0.015, 12345);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double d = m.sample();
        REQUIRE(d >= 0.060);
        REQUIRE(d <= 0.090);
        sum += d;
    }
    CHECK(std::abs(sum / n - 0.075) <= 0.001);
}

TEST_CASE("delays never go negative") {
    LatencyModel m(0.01, 0.01, 3);
    for (int i = 0; i < 10000; ++i) REQUIRE(m.sample() >= 0.0);
}

TEST_CASE("virtual channel delivers on the first tick at or after arrival") {
    VirtualChannel ch(LatencyModel(0.075, 0.0, 1));
    CHECK(ch.send(0.0, Bytes{1}) == 0.075);
    CHECK(ch.deliver(0.05).empty());
    CHECK(ch.deliver(0.06).empty());
    auto got = ch.deliver(0.08);
    REQUIRE(got.size() == 1);
    CHECK(got[0].frame == Bytes{1});
    CHECK(ch.empty());
    CHECK(ch.bytes_sent() == 1);
}

TEST_CASE("virtual channel preserves send order") {
    VirtualChannel ch(LatencyModel(0.075, 0.0, 1));
    ch.send(0.0, Bytes{1});
    ch.send(0.02, Bytes{2});
    auto got = ch.deliver(1.0);
    REQUIRE(got.size() == 2);
    CHECK(got[0].frame == Bytes{1});
    CHECK(got[1].frame == Bytes{2});

    VirtualChannel jittery(LatencyModel(0.05, 0.05, 9));
    double last = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double at = jittery.send(0.001 * i, Bytes{static_cast<std::uint8_t>(i)});
        CHECK(at >= last);
        last = at;
    }
    auto all = jittery.deliver(10.0);
    REQUIRE(all.size() == 1000);
    for (int i = 0; i < 1000; ++i) CHECK(all[i].frame[0] == static_cast<std::uint8_t>(i));
}
