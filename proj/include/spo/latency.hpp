#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "spo/codec.hpp"
#include "spo/config.hpp"

namespace spo {

/// One-way delay: uniform in [base - jitter, base + jitter], clamped at 0.
class LatencyModel {
public:
    LatencyModel(double base_one_way, double jitter_one_way, std::uint64_t seed);

    /// Splits the configured round trip symmetrically: base = rtt / 2,
    /// jitter = jitter_half_width / 2 per direction.
    static LatencyModel from_config(const SpoConfig& cfg, std::uint64_t seed);

    double sample();
    double base() const noexcept { return base_; }
    double jitter() const noexcept { return jitter_; }

private:
    double base_;
    double jitter_;
    std::mt19937_64 rng_;
};

struct TimedFrame {
    double deliver_at = 0.0;
    Bytes frame;
};

/// Releases every frame with deliver_at <= now, in send order. Delivery
/// stops at the first frame that is not yet due (FIFO, no overtaking).
std::vector<TimedFrame> virtual_channel_deliver(std::deque<TimedFrame>& queue, double now);

/// One direction of a simulated link on the virtual clock.
class VirtualChannel {
public:
    explicit VirtualChannel(LatencyModel latency) : latency_(std::move(latency)) {}

    /// Returns the scheduled delivery time. A frame never overtakes an
    /// earlier one: its delivery time is at least the previous frame's.
    double send(double now, Bytes frame);
    std::vector<TimedFrame> deliver(double now) { return virtual_channel_deliver(queue_, now); }

    bool empty() const noexcept { return queue_.empty(); }
    const std::deque<TimedFrame>& pending() const noexcept { return queue_; }
    std::uint64_t bytes_sent() const noexcept { return bytes_sent_; }

private:
    LatencyModel latency_;
    std::deque<TimedFrame> queue_;
    double last_deliver_at_ = 0.0;
    std::uint64_t bytes_sent_ = 0;
};

}  // namespace spo
