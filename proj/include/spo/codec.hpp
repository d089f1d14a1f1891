#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spo/cloud.hpp"
#include "spo/types.hpp"

namespace spo {

// Wire format, all fields little-endian, floats IEEE-754 binary32:
//
//   frame    = type:u8 request_id:u32 step_index:u32 header payload
//   Request  : header = violation_error:f32 d_s:u16,   payload = d_s floats
//   Response : header = tuple_count:u16,              payload = tuple_count tuples
//   tuple    = d_s state floats followed by d_a action floats
//
// A response's step_index is the originating request's step; tuple k
// (0-based) targets step_index + k + 1.

class FrameError : public Error {
public:
    using Error::Error;
};

enum class FrameType : std::uint8_t { Request = 1, Response = 2 };

using Bytes = std::vector<std::uint8_t>;

constexpr std::size_t kFrameCommonBytes = 1 + 4 + 4;
constexpr std::size_t kRequestHeaderBytes = 4 + 2;
constexpr std::size_t kResponseHeaderBytes = 2;

constexpr std::size_t tuple_wire_bytes(std::size_t d_s, std::size_t d_a) { return 4 * (d_s + d_a); }

/// State then action as binary32. Throws FrameError on a value that does not
/// fit a finite float.
Bytes encode_tuple(const SpeculativeTuple& t);
void append_tuple(Bytes& out, const SpeculativeTuple& t);

/// Throws FrameError when the length is not 4 (d_s + d_a) or a value is not finite.
SpeculativeTuple decode_tuple(std::span<const std::uint8_t> bytes, std::size_t d_s, std::size_t d_a,
                              std::uint64_t step_index = 0);

Bytes encode_request(const RolloutRequest& req);
RolloutRequest decode_request(std::span<const std::uint8_t> frame);

Bytes encode_response(const RolloutResponse& resp);
RolloutResponse decode_response(std::span<const std::uint8_t> frame, std::size_t d_s, std::size_t d_a);

/// Reads the type byte; throws FrameError on an empty frame or unknown type.
FrameType peek_frame_type(std::span<const std::uint8_t> frame);

}  // namespace spo
