#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spo/cloud.hpp"
#include "spo/environments.hpp"
#include "spo/types.hpp"

namespace spo {

class CalibrationError : public Error {
public:
    using Error::Error;
};

/// Variances below this are treated as zero.
constexpr double kVarianceFloor = 1e-12;
/// Largest weight a calibrated component may receive.
constexpr double kWeightCap = 1e6;

struct CalibrationResult {
    WeightMatrix weights;
    std::vector<std::size_t> capped_dims;  // components whose weight hit kWeightCap
    std::vector<std::string> warnings;
};

/// Runs `episodes` disturbance-free rollouts of `policy` on the nominal
/// dynamics and returns the inverse (population) variance of each
/// component's one-step delta, capped at kWeightCap. Episode 0 starts at
/// the spec's initial state; later episodes jitter the position components
/// by up to +/-0.05 using `seed`.
///
/// Throws CalibrationError if every component is constant.
CalibrationResult calibrate_weights(const EnvironmentSpec& spec, Policy& policy, int episodes, std::uint64_t seed);

/// Convenience: calibrate against the environment's scripted expert.
CalibrationResult calibrate_weights(const EnvironmentSpec& spec, int episodes, std::uint64_t seed);

/// Inverse variance of a set of per-component samples (one row per sample).
CalibrationResult weights_from_deltas(const std::vector<std::vector<double>>& deltas, std::size_t d_s);

}  // namespace spo
