#include "spo/codec.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace spo {

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(Bytes& out, double v) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) throw FrameError(fmt::format("value {} is not representable as a finite binary32", v));
    put_u32(out, std::bit_cast<std::uint32_t>(f));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

    std::uint8_t u8() {
        need(1);
        return b_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        const auto v = static_cast<std::uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f32() {
        const float f = std::bit_cast<float>(u32());
        if (!std::isfinite(f)) throw FrameError("non-finite value in frame");
        return static_cast<double>(f);
    }
    std::span<const std::uint8_t> take(std::size_t n) {
        need(n);
        auto s = b_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return b_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (b_.size() - pos_ < n) throw FrameError("truncated frame");
    }
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

std::uint32_t wire_step(std::uint64_t step) {
    if (step > std::numeric_limits<std::uint32_t>::max()) throw FrameError("step index exceeds 32 bits");
    return static_cast<std::uint32_t>(step);
}

}  // namespace

void append_tuple(Bytes& out, const SpeculativeTuple& t) {
    for (double v : t.predicted_state.values()) put_f32(out, v);
    for (double v : t.action.values()) put_f32(out, v);
}

Bytes encode_tuple(const SpeculativeTuple& t) {
    Bytes out;
    out.reserve(tuple_wire_bytes(t.predicted_state.size(), t.action.size()));
    append_tuple(out, t);
    return out;
}

SpeculativeTuple decode_tuple(std::span<const std::uint8_t> bytes, std::size_t d_s, std::size_t d_a,
                              std::uint64_t step_index) {
    if (bytes.size() != tuple_wire_bytes(d_s, d_a)) {
        throw FrameError(fmt::format("tuple payload is {} bytes, expected {} for d_s={}, d_a={}", bytes.size(),
                                     tuple_wire_bytes(d_s, d_a), d_s, d_a));
    }
    Reader r(bytes);
    std::vector<double> s(d_s), a(d_a);
    for (auto& v : s) v = r.f32();
    for (auto& v : a) v = r.f32();
    return {StateVector(std::move(s)), ActionVector(std::move(a)), step_index};
}

Bytes encode_request(const RolloutRequest& req) {
    const std::size_t d_s = req.observed_state.size();
    if (d_s > std::numeric_limits<std::uint16_t>::max()) throw FrameError("state dimension exceeds 16 bits");
    Bytes out;
    out.reserve(kFrameCommonBytes + kRequestHeaderBytes + 4 * d_s);
    out.push_back(static_cast<std::uint8_t>(FrameType::Request));
    put_u32(out, req.request_id);
    put_u32(out, wire_step(req.step_index));
    put_f32(out, req.violation_error);
    put_u16(out, static_cast<std::uint16_t>(d_s));
    for (double v : req.observed_state.values()) put_f32(out, v);
    return out;
}

RolloutRequest decode_request(std::span<const std::uint8_t> frame) {
    Reader r(frame);
    if (r.u8() != static_cast<std::uint8_t>(FrameType::Request)) throw FrameError("not a request frame");
    RolloutRequest req;
    req.request_id = r.u32();
    req.step_index = r.u32();
    req.violation_error = r.f32();
    if (req.violation_error < 0.0) throw FrameError("negative violation error");
    const std::size_t d_s = r.u16();
    if (r.remaining() != 4 * d_s)
        throw FrameError(fmt::format("request payload is {} bytes, expected {}", r.remaining(), 4 * d_s));
    std::vector<double> s(d_s);
    for (auto& v : s) v = r.f32();
    req.observed_state = StateVector(std::move(s));
    return req;
}

Bytes encode_response(const RolloutResponse& resp) {
    if (resp.tuples.size() > std::numeric_limits<std::uint16_t>::max()) throw FrameError("too many tuples");
    const std::size_t per = resp.tuples.empty()
                                ? 0
                                : tuple_wire_bytes(resp.tuples[0].predicted_state.size(), resp.tuples[0].action.size());
    Bytes out;
    out.reserve(kFrameCommonBytes + kResponseHeaderBytes + per * resp.tuples.size());
    out.push_back(static_cast<std::uint8_t>(FrameType::Response));
    put_u32(out, resp.request_id);
    put_u32(out, wire_step(resp.origin_step));
    put_u16(out, static_cast<std::uint16_t>(resp.tuples.size()));
    for (const auto& t : resp.tuples) {
        if (tuple_wire_bytes(t.predicted_state.size(), t.action.size()) != per)
            throw FrameError("tuples of one response must share dimensions");
        append_tuple(out, t);
    }
    return out;
}

RolloutResponse decode_response(std::span<const std::uint8_t> frame, std::size_t d_s, std::size_t d_a) {
    Reader r(frame);
    if (r.u8() != static_cast<std::uint8_t>(FrameType::Response)) throw FrameError("not a response frame");
    RolloutResponse resp;
    resp.request_id = r.u32();
    resp.origin_step = r.u32();
    const std::size_t count = r.u16();
    const std::size_t per = tuple_wire_bytes(d_s, d_a);
    if (r.remaining() != count * per)
        throw FrameError(fmt::format("response payload is {} bytes, expected {}", r.remaining(), count * per));
    resp.tuples.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        resp.tuples.push_back(decode_tuple(r.take(per), d_s, d_a, resp.origin_step + k + 1));
    }
    resp.horizon_used = static_cast<int>(count);
    return resp;
}

FrameType peek_frame_type(std::span<const std::uint8_t> frame) {
    if (frame.empty()) throw FrameError("empty frame");
    switch (frame[0]) {
        case 1: return FrameType::Request;
        case 2: return FrameType::Response;
        default: throw FrameError(fmt::format("unknown frame type {}", frame[0]));
    }
}

}  // namespace spo
