#include <cmath>

#include <doctest.h>

#include "spo/calibration.hpp"

using namespace spo;

namespace {

class AlternatingPolicy final : public Policy {
public:
    ActionVector act(const StateVector&) override {
        sign_ = -sign_;
        return ActionVector({-sign_});
    }

private:
    double sign_ = -1.0;  // first action is +1
};

}  // namespace

TEST_CASE("weights are inverse variances") {
    // component 0: {-2, 2} has population variance 4
    auto r = weights_from_deltas({{-2.0, 1.0}, {2.0, 3.0}}, 2);
    CHECK(r.weights[0] == doctest::Approx(0.25));
    CHECK(r.weights[1] == doctest::Approx(1.0));
    CHECK(r.capped_dims.empty());
    CHECK(r.warnings.empty());
}

TEST_CASE("constant components are capped with a warning") {
    auto r = weights_from_deltas({{1.0, 5.0}, {3.0, 5.0}, {2.0, 5.0}}, 2);
    CHECK(r.weights[1] == kWeightCap);
    REQUIRE(r.capped_dims.size() == 1);
    CHECK(r.capped_dims[0] == 1);
    CHECK(r.warnings.size() == 1);
}

TEST_CASE("an all-constant rollout cannot be calibrated") {
    CHECK_THROWS_AS(weights_from_deltas({{1.0, 5.0}, {1.0, 5.0}}, 2), CalibrationError);
    CHECK_THROWS_AS(weights_from_deltas({}, 2), CalibrationError);
}

TEST_CASE("integrator under an alternating policy matches the closed form") {
    auto spec = make_integrator(1, 0.02);
    spec.goal_center = StateVector({100.0, 0.0});
    spec.max_steps = 100;
    AlternatingPolicy policy;
    auto r = calibrate_weights(spec, policy, 1, 7);

    // position deltas: +-0.02, 50 each
    const double var_pos = 0.02 * 0.02;
    // velocity deltas: 1, then -2, +2, ... (50 x -2, 49 x +2)
    const double n = 100.0;
    const double sum = 1.0 - 2.0 * 50 + 2.0 * 49;
    const double sum_sq = 1.0 + 4.0 * 99;
    const double var_vel = sum_sq / n - (sum / n) * (sum / n);

    CHECK(std::abs(r.weights[0] - 1.0 / var_pos) <= 1e-9 * (1.0 / var_pos));
    CHECK(std::abs(r.weights[1] - 1.0 / var_vel) <= 1e-9);
}

TEST_CASE("expert calibration succeeds on every canonical environment") {
    for (const auto& name : canonical_environment_names()) {
        CAPTURE(name);
        auto spec = make_environment(name);
        auto r = calibrate_weights(spec, 2, 1);
        CHECK(r.weights.size() == spec.d_s);
        for (std::size_t i = 0; i < spec.d_s; ++i) {
            CHECK(r.weights[i] > 0.0);
            CHECK(r.weights[i] <= kWeightCap);
        }
    }
}

TEST_CASE("calibration rejects zero episodes") {
    CHECK_THROWS_AS(calibrate_weights(make_environment("free_space"), 0, 1), InvalidArgument);
}
