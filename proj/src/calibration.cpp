#include "spo/calibration.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

namespace spo {

CalibrationResult weights_from_deltas(const std::vector<std::vector<double>>& deltas, std::size_t d_s) {
    if (deltas.empty()) throw CalibrationError("calibration produced no transitions");

    // Welford per component
    std::vector<double> mean(d_s, 0.0), m2(d_s, 0.0);
    std::size_t n = 0;
    for (const auto& row : deltas) {
        require_dimension(row.size(), d_s, "calibration delta");
        ++n;
        for (std::size_t i = 0; i < d_s; ++i) {
            const double d = row[i] - mean[i];
            mean[i] += d / static_cast<double>(n);
            m2[i] += d * (row[i] - mean[i]);
        }
    }

    CalibrationResult out;
    std::vector<double> w(d_s);
    for (std::size_t i = 0; i < d_s; ++i) {
        const double var = m2[i] / static_cast<double>(n);
        if (var < kVarianceFloor) {
            w[i] = std::min(1.0 / kVarianceFloor, kWeightCap);
            out.capped_dims.push_back(i);
        } else {
            w[i] = std::min(1.0 / var, kWeightCap);
            if (w[i] == kWeightCap) out.capped_dims.push_back(i);
        }
    }
    if (out.capped_dims.size() == d_s) {
        std::string dims;
        for (std::size_t i = 0; i < std::min<std::size_t>(d_s, 16); ++i) dims += fmt::format("{}{}", i ? "," : "", i);
        if (d_s > 16) dims += ",...";
        throw CalibrationError(fmt::format("calibration rollout is constant in every component (dims {})", dims));
    }
    if (!out.capped_dims.empty()) {
        out.warnings.push_back(fmt::format("{} of {} components have (near-)zero delta variance; weight capped at {}",
                                           out.capped_dims.size(), d_s, kWeightCap));
    }
    out.weights = WeightMatrix(std::move(w));
    return out;
}

CalibrationResult calibrate_weights(const EnvironmentSpec& spec, Policy& policy, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw InvalidArgument("calibration needs at least one episode");
    validate_environment(spec);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    std::vector<std::vector<double>> deltas;

    for (int ep = 0; ep < episodes; ++ep) {
        std::vector<double> s0 = spec.initial_state.vec();
        if (ep > 0) {
            for (std::size_t i = 0; i < spec.d_a; ++i) s0[i] += jitter(rng);
        }
        StateVector s(std::move(s0));
        for (int t = 0; t < spec.max_steps && !is_success(spec, s); ++t) {
            StateVector next = nominal_step(spec, s, policy.act(s));
            std::vector<double> d(spec.d_s);
            for (std::size_t i = 0; i < spec.d_s; ++i) d[i] = next[i] - s[i];
            deltas.push_back(std::move(d));
            s = std::move(next);
        }
    }
    return weights_from_deltas(deltas, spec.d_s);
}

CalibrationResult calibrate_weights(const EnvironmentSpec& spec, int episodes, std::uint64_t seed) {
    ExpertPolicy expert(spec);
    return calibrate_weights(spec, expert, episodes, seed);
}

}  // namespace spo
