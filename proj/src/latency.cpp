#include "spo/latency.hpp"

#include <algorithm>
#include <cmath>

namespace spo {

LatencyModel::LatencyModel(double base_one_way, double jitter_one_way, std::uint64_t seed)
    : base_(base_one_way), jitter_(jitter_one_way), rng_(seed) {
    if (!(base_ >= 0.0) || !(jitter_ >= 0.0) || !std::isfinite(base_) || !std::isfinite(jitter_))
        throw InvalidArgument("latency base and jitter must be finite and nonnegative");
}

LatencyModel LatencyModel::from_config(const SpoConfig& cfg, std::uint64_t seed) {
    return LatencyModel(cfg.rtt_base / 2.0, cfg.jitter_half_width / 2.0, seed);
}

double LatencyModel::sample() {
    if (jitter_ == 0.0) return base_;
    std::uniform_real_distribution<double> u(base_ - jitter_, base_ + jitter_);
    return std::max(0.0, u(rng_));
}

std::vector<TimedFrame> virtual_channel_deliver(std::deque<TimedFrame>& queue, double now) {
    std::vector<TimedFrame> out;
    while (!queue.empty() && queue.front().deliver_at <= now) {
        out.push_back(std::move(queue.front()));
        queue.pop_front();
    }
    return out;
}

double VirtualChannel::send(double now, Bytes frame) {
    const double at = std::max(now + latency_.sample(), last_deliver_at_);
    last_deliver_at_ = at;
    bytes_sent_ += frame.size();
    queue_.push_back({at, std::move(frame)});
    return at;
}

}  // namespace spo
