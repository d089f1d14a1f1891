#include "spo/types.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace spo {

RealVector::RealVector(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidArgument(fmt::format("non-finite entry {} at index {}", values_[i], i));
        }
    }
}

ActionVector ActionVector::zero(std::size_t d_a) { return zero_action(d_a); }

bool ActionVector::is_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

ActionVector zero_action(std::size_t d_a) {
    if (d_a == 0) throw DimensionError("action dimension must be >= 1");
    return ActionVector(std::vector<double>(d_a, 0.0));
}

WeightMatrix::WeightMatrix(std::vector<double> inverse_variances) : w_(std::move(inverse_variances)) {
    if (w_.empty()) throw DimensionError("weight matrix must have at least one entry");
    for (std::size_t i = 0; i < w_.size(); ++i) {
        if (!std::isfinite(w_[i]) || w_[i] <= 0.0) {
            throw InvalidArgument(fmt::format("weight {} at index {} must be positive and finite", w_[i], i));
        }
    }
}

WeightMatrix WeightMatrix::identity(std::size_t d_s) { return WeightMatrix(std::vector<double>(d_s, 1.0)); }

void require_dimension(std::size_t actual, std::size_t expected, const char* what) {
    if (actual != expected) {
        throw DimensionError(fmt::format("{}: expected dimension {}, got {}", what, expected, actual));
    }
}

}  // namespace spo
