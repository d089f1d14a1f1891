#pragma once

#include "spo/types.hpp"

namespace spo {

enum class Decision { Hit, Miss };

struct VerificationOutcome {
    double error = 0.0;      // weighted tracking error e_t
    Decision decision = Decision::Hit;
    double threshold = 0.0;  // epsilon_base at the time of the check
};

/// sqrt(sum_i w_i (actual_i - predicted_i)^2). Throws DimensionError on mismatch.
double tracking_error(const StateVector& actual, const StateVector& predicted, const WeightMatrix& weights);

/// Epsilon-tube check of the observed state against a cached tuple.
/// The boundary error == epsilon_base is a hit.
VerificationOutcome verify(const StateVector& actual, const SpeculativeTuple& tuple,
                           const WeightMatrix& weights, double epsilon_base);

}  // namespace spo
