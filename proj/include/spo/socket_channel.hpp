#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spo/codec.hpp"
#include "spo/config.hpp"
#include "spo/latency.hpp"
#include "spo/session.hpp"

namespace spo {

class SocketError : public Error {
public:
    using Error::Error;
};

/// Session handshake sent by the edge before any request: a key = value
/// block describing kind, seed, environment, model and SpoConfig.
constexpr std::uint8_t kHelloFrameType = 3;

Bytes encode_hello(const KeyValues& values);
KeyValues decode_hello(std::span<const std::uint8_t> frame);

/// Builds the handshake for one run.
KeyValues hello_values(const EnvironmentSpec& spec, const SpoConfig& cfg, const SessionOptions& opts);

/// Connected TCP stream carrying [u32 LE length][frame] records.
class FrameSocket {
public:
    explicit FrameSocket(int fd) noexcept : fd_(fd) {}
    FrameSocket(FrameSocket&& other) noexcept;
    FrameSocket& operator=(FrameSocket&& other) noexcept;
    FrameSocket(const FrameSocket&) = delete;
    FrameSocket& operator=(const FrameSocket&) = delete;
    ~FrameSocket();

    /// Throws SocketError when the address cannot be resolved or reached.
    static FrameSocket connect(const std::string& host, std::uint16_t port);

    /// Safe to call from several threads.
    void send(const Bytes& frame);
    /// nullopt on an orderly close by the peer; throws on a broken stream.
    std::optional<Bytes> receive();
    void shutdown() noexcept;
    int fd() const noexcept { return fd_; }

private:
    int fd_ = -1;
    std::mutex send_mutex_;
};

/// Receiver-side delay injection. Each arriving frame is held for one
/// LatencyModel sample; release order is arrival order.
class DelayShim {
public:
    using Clock = std::chrono::steady_clock;

    explicit DelayShim(LatencyModel latency) : latency_(std::move(latency)) {}

    void push(Clock::time_point arrived, Bytes frame);
    /// Frames due at `now`, oldest first.
    std::vector<Bytes> drain(Clock::time_point now);
    /// Blocks until the next frame is due; nullopt once closed and empty.
    std::optional<Bytes> wait_pop();
    void close();
    bool closed() const;

private:
    LatencyModel latency_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::pair<Clock::time_point, Bytes>> queue_;
    Clock::time_point last_{};
    bool closed_ = false;
};

/// TCP cloud endpoint. Every connection gets its own CloudSession, AHS
/// state and uplink shim, served on a dedicated thread.
class CloudServer {
public:
    /// Binds to `port` on all interfaces; port 0 picks a free one.
    explicit CloudServer(std::uint16_t port);
    ~CloudServer();
    CloudServer(const CloudServer&) = delete;
    CloudServer& operator=(const CloudServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }

    /// Accepts sessions until stop() or, if max_sessions > 0, until that
    /// many sessions have finished.
    void run(int max_sessions = 0);
    void stop() noexcept;

private:
    void serve_session(FrameSocket sock);

    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::vector<std::thread> workers_;
};

/// Edge loop in real time against a remote cloud. The tick period is
/// cfg.control_interval of wall-clock time; the downlink delay is injected
/// by a shim on the edge side. Generated predictions are counted as they
/// arrive, so frames still on the wire at the end are not included.
RunResult run_socket_session(const EnvironmentSpec& spec, const SpoConfig& cfg, const WeightMatrix& weights,
                             const SessionOptions& opts, const std::string& host, std::uint16_t port);

/// Splits "host:port"; a bare port means 127.0.0.1.
std::pair<std::string, std::uint16_t> parse_address(const std::string& addr);

}  // namespace spo
