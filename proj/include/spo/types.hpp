#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spo {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector length disagrees with the configured dimension, or a dimension is 0.
class DimensionError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Dense vectors
// ---------------------------------------------------------------------------

/// A finite real vector. Construction rejects NaN/Inf so that every
/// surviving instance is usable by the verifier without further checks.
class RealVector {
public:
    RealVector() = default;
    explicit RealVector(std::vector<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& vec() const noexcept { return values_; }

    friend bool operator==(const RealVector&, const RealVector&) = default;

protected:
    std::vector<double> values_;
};

/// Robot + task state s_t (joint positions, progress markers, object poses).
class StateVector : public RealVector {
public:
    using RealVector::RealVector;
    friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// Commanded joint velocities plus gripper scalar.
class ActionVector : public RealVector {
public:
    using RealVector::RealVector;
    friend bool operator==(const ActionVector&, const ActionVector&) = default;

    static ActionVector zero(std::size_t d_a);
    bool is_zero() const noexcept;
};

/// The hold reflex command. Throws DimensionError for d_a == 0.
ActionVector zero_action(std::size_t d_a);

/// One cached prediction: the state expected at `step_index` and the action
/// to apply there.
struct SpeculativeTuple {
    StateVector predicted_state;
    ActionVector action;
    std::uint64_t step_index = 0;

    friend bool operator==(const SpeculativeTuple&, const SpeculativeTuple&) = default;
};

/// Diagonal of the verifier's normalization matrix (inverse variances).
class WeightMatrix {
public:
    WeightMatrix() = default;
    explicit WeightMatrix(std::vector<double> inverse_variances);

    static WeightMatrix identity(std::size_t d_s);

    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> values() const noexcept { return w_; }

private:
    std::vector<double> w_;
};

void require_dimension(std::size_t actual, std::size_t expected, const char* what);

}  // namespace spo
