#include <cmath>
#include <limits>

#include <doctest.h>

#include "spo/config.hpp"
#include "spo/types.hpp"

using namespace spo;

TEST_CASE("zero action has the requested width and only zeros") {
    for (std::size_t d : {8u, 1u, 3u}) {
        ActionVector a = zero_action(d);
        CHECK(a.size() == d);
        CHECK(a.is_zero());
        for (double x : a.values()) CHECK(x == 0.0);
    }
    CHECK_THROWS_AS(zero_action(0), DimensionError);
}

TEST_CASE("vectors reject non-finite entries") {
    CHECK_THROWS_AS(StateVector({1.0, std::nan("")}), InvalidArgument);
    CHECK_THROWS_AS(ActionVector({std::numeric_limits<double>::infinity()}), InvalidArgument);
    CHECK_NOTHROW(StateVector({0.0, -1.5}));
}

TEST_CASE("weights must be strictly positive and finite") {
    CHECK_THROWS_AS(WeightMatrix({1.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(WeightMatrix({1.0, -2.0}), InvalidArgument);
    CHECK_THROWS_AS(WeightMatrix({std::numeric_limits<double>::infinity()}), InvalidArgument);
    auto id = WeightMatrix::identity(4);
    CHECK(id.size() == 4);
    CHECK(id[3] == 1.0);
}

TEST_CASE("reference configuration is valid") {
    SpoConfig cfg;
    CHECK(cfg.k_min == 2);
    CHECK(cfg.k_max == 10);
    CHECK(cfg.beta == 1);
    CHECK(cfg.epsilon_base == 20.0);
    CHECK(cfg.control_interval == 0.02);
    CHECK(cfg.rtt_base == 0.15);
    CHECK(cfg.jitter_half_width == 0.03);
    CHECK(config_violations(cfg).empty());
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("config violations name the broken bound") {
    SpoConfig cfg;
    cfg.k_min = 5;
    cfg.k_max = 2;
    auto v = config_violations(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("k_min <= k_max violated") != std::string::npos);

    SpoConfig eps;
    eps.epsilon_base = 0.0;
    v = config_violations(eps);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("epsilon_base > 0 violated") != std::string::npos);

    SpoConfig many;
    many.epsilon_base = -1;
    many.control_interval = 0;
    many.jitter_half_width = 0.5;
    many.prefetch_low_watermark = 3;
    CHECK(config_violations(many).size() == 4);
    try {
        validate_config(many);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.violations().size() == 4);
    }
}

TEST_CASE("key value files round trip through the config") {
    auto kv = parse_key_values("# comment\nk_min = 3\n  k_max=9  # trailing\n\nrtt_base = 0.2\nmystery = 1\n");
    SpoConfig cfg;
    auto unknown = apply_config(kv, cfg);
    CHECK(cfg.k_min == 3);
    CHECK(cfg.k_max == 9);
    CHECK(cfg.rtt_base == doctest::Approx(0.2));
    REQUIRE(unknown.size() == 1);
    CHECK(unknown[0] == "mystery");

    SpoConfig back;
    apply_config(config_to_key_values(cfg), back);
    CHECK(back.k_min == cfg.k_min);
    CHECK(back.rtt_base == cfg.rtt_base);
    CHECK(back.epsilon_base == cfg.epsilon_base);

    SpoConfig bad;
    CHECK_THROWS(apply_config({{"k_min", "two"}}, bad));
}
