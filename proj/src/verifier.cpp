#include "spo/verifier.hpp"

#include <cmath>

namespace spo {

double tracking_error(const StateVector& actual, const StateVector& predicted, const WeightMatrix& weights) {
    require_dimension(predicted.size(), actual.size(), "tracking_error: predicted state");
    require_dimension(weights.size(), actual.size(), "tracking_error: weights");

    const double* a = actual.values().data();
    const double* p = predicted.values().data();
    const double* w = weights.values().data();
    const std::size_t n = actual.size();

    double sum = 0.0;
#pragma omp simd reduction(+ : sum)
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - p[i];
        sum += w[i] * d * d;
    }
    return std::sqrt(sum);
}

VerificationOutcome verify(const StateVector& actual, const SpeculativeTuple& tuple,
                           const WeightMatrix& weights, double epsilon_base) {
    if (!(epsilon_base > 0.0)) throw InvalidArgument("verify: epsilon_base must be positive");
    require_dimension(tuple.predicted_state.size(), actual.size(), "verify: predicted state");

    VerificationOutcome out;
    out.error = tracking_error(actual, tuple.predicted_state, weights);
    out.threshold = epsilon_base;
    out.decision = out.error <= epsilon_base ? Decision::Hit : Decision::Miss;
    return out;
}

}  // namespace spo
