#include "spo/socket_channel.hpp"

#include <cerrno>
#include <cstring>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fmt/format.h>

namespace spo {

namespace {

std::string errno_text() { return std::strerror(errno); }

bool write_all(int fd, const std::uint8_t* p, std::size_t n) {
    while (n > 0) {
        ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        p += w;
        n -= static_cast<std::size_t>(w);
    }
    return true;
}

// 1 = ok, 0 = clean EOF before any byte, -1 = error or truncated
int read_all(int fd, std::uint8_t* p, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        ssize_t r = ::recv(fd, p + got, n - got, 0);
        if (r == 0) return got == 0 ? 0 : -1;
        if (r < 0) {
            if (errno == EINTR) continue;
            return -1;
        }
        got += static_cast<std::size_t>(r);
    }
    return 1;
}

constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

}  // namespace

// ---------------------------------------------------------------------------

Bytes encode_hello(const KeyValues& values) {
    Bytes out{kHelloFrameType};
    for (const auto& [k, v] : values) {
        if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
            throw FrameError("hello: key or value contains a separator: " + k);
        std::string line = k + "=" + v + "\n";
        out.insert(out.end(), line.begin(), line.end());
    }
    return out;
}

KeyValues decode_hello(std::span<const std::uint8_t> frame) {
    if (frame.empty() || frame[0] != kHelloFrameType) throw FrameError("hello: wrong frame type");
    return parse_key_values(std::string(frame.begin() + 1, frame.end()));
}

KeyValues hello_values(const EnvironmentSpec& spec, const SpoConfig& cfg, const SessionOptions& opts) {
    KeyValues kv = config_to_key_values(cfg);
    kv["env"] = spec.name;
    kv["env.max_steps"] = fmt::format("{}", spec.max_steps);
    kv["env.goal_radius"] = fmt::format("{}", spec.goal_radius);
    kv["env.reach_tolerance"] = fmt::format("{}", spec.reach_tolerance);
    kv["env.max_speed"] = fmt::format("{}", spec.max_speed);
    kv["kind"] = to_string(opts.kind);
    kv["seed"] = fmt::format("{}", opts.seed);
    kv["model"] = to_string(opts.model.kind);
    kv["model.drift_bias"] = fmt::format("{}", opts.model.drift_bias);
    kv["model.drift_noise"] = fmt::format("{}", opts.model.drift_noise);
    return kv;
}

std::pair<std::string, std::uint16_t> parse_address(const std::string& addr) {
    std::string host = "127.0.0.1";
    std::string port = addr;
    if (auto colon = addr.rfind(':'); colon != std::string::npos) {
        host = addr.substr(0, colon);
        port = addr.substr(colon + 1);
        if (host.empty()) host = "127.0.0.1";
    }
    long long p = parse_int("addr port", port);
    if (p < 1 || p > 65535) throw InvalidArgument(fmt::format("port out of range in `{}`", addr));
    return {host, static_cast<std::uint16_t>(p)};
}

// ---------------------------------------------------------------------------

FrameSocket::FrameSocket(FrameSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

FrameSocket& FrameSocket::operator=(FrameSocket&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

FrameSocket::~FrameSocket() {
    if (fd_ >= 0) ::close(fd_);
}

FrameSocket FrameSocket::connect(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
        throw SocketError(fmt::format("cannot resolve {}: {}", host, ::gai_strerror(rc)));

    int fd = -1;
    std::string last_error = "no addresses";
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            last_error = errno_text();
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        last_error = errno_text();
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw SocketError(fmt::format("cannot connect to {}:{}: {}", host, port, last_error));
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return FrameSocket(fd);
}

void FrameSocket::send(const Bytes& frame) {
    if (frame.size() > kMaxFrameBytes) throw SocketError("frame too large");
    Bytes buf(4 + frame.size());
    const auto n = static_cast<std::uint32_t>(frame.size());
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<std::uint8_t>(n >> (8 * i));
    std::copy(frame.begin(), frame.end(), buf.begin() + 4);
    std::lock_guard lock(send_mutex_);
    if (!write_all(fd_, buf.data(), buf.size())) throw SocketError("send failed: " + errno_text());
}

std::optional<Bytes> FrameSocket::receive() {
    std::uint8_t hdr[4];
    int rc = read_all(fd_, hdr, 4);
    if (rc == 0) return std::nullopt;
    if (rc < 0) throw SocketError("connection broken while reading a frame header");
    const std::uint32_t n = hdr[0] | (hdr[1] << 8) | (hdr[2] << 16) | (static_cast<std::uint32_t>(hdr[3]) << 24);
    if (n > kMaxFrameBytes) throw SocketError(fmt::format("frame length {} exceeds limit", n));
    Bytes frame(n);
    if (n > 0 && read_all(fd_, frame.data(), n) != 1) throw SocketError("connection broken inside a frame");
    return frame;
}

void FrameSocket::shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

// ---------------------------------------------------------------------------

void DelayShim::push(Clock::time_point arrived, Bytes frame) {
    std::lock_guard lock(mutex_);
    auto delay = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(latency_.sample()));
    last_ = std::max(arrived + delay, last_);
    queue_.emplace_back(last_, std::move(frame));
    cv_.notify_all();
}

std::vector<Bytes> DelayShim::drain(Clock::time_point now) {
    std::lock_guard lock(mutex_);
    std::vector<Bytes> out;
    while (!queue_.empty() && queue_.front().first <= now) {
        out.push_back(std::move(queue_.front().second));
        queue_.pop_front();
    }
    return out;
}

std::optional<Bytes> DelayShim::wait_pop() {
    std::unique_lock lock(mutex_);
    for (;;) {
        if (queue_.empty()) {
            if (closed_) return std::nullopt;
            cv_.wait(lock);
            continue;
        }
        auto due = queue_.front().first;
        if (Clock::now() >= due) {
            Bytes f = std::move(queue_.front().second);
            queue_.pop_front();
            return f;
        }
        cv_.wait_until(lock, due);
    }
}

void DelayShim::close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    cv_.notify_all();
}

bool DelayShim::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

// ---------------------------------------------------------------------------

CloudServer::CloudServer(std::uint16_t port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw SocketError("socket: " + errno_text());
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0) {
        std::string err = errno_text();
        ::close(listen_fd_);
        throw SocketError(fmt::format("cannot listen on port {}: {}", port, err));
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

CloudServer::~CloudServer() {
    stop();
    for (auto& t : workers_)
        if (t.joinable()) t.join();
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void CloudServer::stop() noexcept { stopping_ = true; }

void CloudServer::run(int max_sessions) {
    int accepted = 0;
    while (!stopping_ && (max_sessions <= 0 || accepted < max_sessions)) {
        pollfd p{listen_fd_, POLLIN, 0};
        int rc = ::poll(&p, 1, 100);
        if (rc <= 0) continue;
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        ++accepted;
        workers_.emplace_back([this, fd] { serve_session(FrameSocket(fd)); });
    }
    for (auto& t : workers_)
        if (t.joinable()) t.join();
    workers_.clear();
}

void CloudServer::serve_session(FrameSocket sock) {
    try {
        auto first = sock.receive();
        if (!first) return;
        const KeyValues kv = decode_hello(*first);

        SpoConfig cfg;
        apply_config(kv, cfg);
        validate_config(cfg);
        EnvironmentSpec env = environment_from_key_values(kv, "free_space");
        env.control_interval = cfg.control_interval;
        auto get = [&](const std::string& k, const std::string& dflt) {
            auto it = kv.find(k);
            return it == kv.end() ? dflt : it->second;
        };
        const BaselineKind kind = parse_baseline_kind(get("kind", "spo"));
        const auto seed = static_cast<std::uint64_t>(parse_int("seed", get("seed", "1")));
        ModelOptions model;
        model.kind = parse_model_kind(get("model", "oracle"));
        model.drift_bias = parse_double("model.drift_bias", get("model.drift_bias", "0"));
        model.drift_noise = parse_double("model.drift_noise", get("model.drift_noise", "0"));

        CloudSession cloud(std::make_unique<ExpertPolicy>(env), make_world_model(env, model, derive_seed(seed, kModelStream)),
                           horizon_controller(kind, cfg), cfg);
        DelayShim uplink(LatencyModel::from_config(cfg, derive_seed(seed, kUplinkStream)));

        std::thread reader([&] {
            try {
                while (auto f = sock.receive()) uplink.push(DelayShim::Clock::now(), std::move(*f));
            } catch (const Error&) {
            }
            uplink.close();
        });
        try {
            while (auto f = uplink.wait_pop()) {
                RolloutResponse resp = cloud.serve(decode_request(*f));
                sock.send(encode_response(resp));
            }
        } catch (const Error& e) {
            fmt::print(stderr, "cloud session error: {}\n", e.what());
            sock.shutdown();
        }
        reader.join();
    } catch (const Error& e) {
        fmt::print(stderr, "cloud session rejected: {}\n", e.what());
    }
}

// ---------------------------------------------------------------------------

RunResult run_socket_session(const EnvironmentSpec& spec, const SpoConfig& cfg, const WeightMatrix& weights,
                             const SessionOptions& opts, const std::string& host, std::uint16_t port) {
    using Clock = DelayShim::Clock;
    validate_config(cfg);
    validate_environment(spec);
    require_dimension(weights.size(), spec.d_s, "run_socket_session: weights");

    EnvironmentSpec env = spec;
    env.control_interval = cfg.control_interval;

    FrameSocket sock = FrameSocket::connect(host, port);
    sock.send(encode_hello(hello_values(env, cfg, opts)));

    DelayShim downlink(LatencyModel::from_config(cfg, derive_seed(opts.seed, kDownlinkStream)));
    std::atomic<std::uint64_t> bytes_down{0};
    std::atomic<bool> broken{false};
    std::string reader_error;
    std::thread reader([&] {
        try {
            while (auto f = sock.receive()) {
                bytes_down += f->size();
                downlink.push(Clock::now(), std::move(*f));
            }
        } catch (const Error& e) {
            reader_error = e.what();
            broken = true;
        }
        downlink.close();
    });

    RunResult result;
    RunMetrics& m = result.metrics;
    m.kind = to_string(opts.kind);
    m.seed = opts.seed;

    EdgeSession edge(cfg, weights, env.d_s, env.d_a, opts.kind != BaselineKind::Blocking);
    StateVector state = env.initial_state;
    const double dt = cfg.control_interval;
    const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(dt));
    std::uint64_t bytes_up = 0;
    std::string failure;

    const auto t0 = Clock::now();
    try {
        for (std::uint64_t step = 0; step < static_cast<std::uint64_t>(env.max_steps); ++step) {
            if (is_success(env, state)) {
                m.success = true;
                break;
            }
            const auto tick_at = t0 + period * static_cast<long>(step);
            std::this_thread::sleep_until(tick_at);

            for (auto& f : downlink.drain(tick_at)) edge.deliver(decode_response(f, env.d_s, env.d_a), step);
            if (downlink.closed() && edge.request_in_flight())
                throw SocketError(broken ? "connection to cloud lost: " + reader_error : "cloud closed the connection");

            StepRecord rec;
            if (auto req = edge.tick(step, state, static_cast<double>(step) * dt, rec)) {
                Bytes frame = encode_request(*req);
                bytes_up += frame.size();
                sock.send(frame);
            }
            state = true_step(env, state, rec.action_executed, step);
            result.records.push_back(std::move(rec));
        }
        if (!m.success && is_success(env, state)) m.success = true;
    } catch (const SocketError& e) {
        failure = e.what();
    } catch (const FrameError& e) {
        failure = e.what();
    } catch (const Error& e) {
        m.diagnostic = e.what();
    }

    sock.shutdown();
    reader.join();
    if (!failure.empty()) throw SocketError(failure);

    tally_records(result.records, dt, m);
    m.subgoals_completed = stages_completed(env, state);
    result.granted_horizons = edge.granted_horizons();
    m.refills = result.granted_horizons.size();
    if (opts.kind != BaselineKind::Blocking && !result.granted_horizons.empty()) {
        double sum = 0.0;
        for (int k : result.granted_horizons) sum += k;
        m.mean_horizon = sum / static_cast<double>(result.granted_horizons.size());
    }
    m.generated_predictions = edge.tuples_received();
    m.executed_predictions = edge.executed();
    m.wasted_predictions = edge.wasted();
    m.leftover_predictions = edge.cache().size();
    m.bytes_up = bytes_up;
    m.bytes_down = bytes_down;

    if (!opts.keep_records) result.records.clear();
    return result;
}

}  // namespace spo
