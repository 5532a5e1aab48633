#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fog/error.hpp"

namespace fog::serving {

using Bytes = std::vector<std::uint8_t>;
using RequestId = std::array<std::uint8_t, 16>;

enum class FrameType : std::uint8_t {
  infer_req = 0x01,
  infer_resp = 0x02,
  error = 0x03,
  ping = 0x04,
  pong = 0x05,
};

/// "FRS1" | version 0x01 | type | length (u32 BE) | payload
struct Frame {
  FrameType type = FrameType::ping;
  Bytes payload;

  bool operator==(const Frame&) const = default;
};

inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'F', 'R', 'S', '1'};
inline constexpr std::uint8_t kFrameVersion = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 10;

enum class FrameErrorCode { bad_magic, bad_version, unknown_type, truncated, too_large, trailing_bytes };

std::string_view to_string(FrameErrorCode code);

class FrameError : public Error {
 public:
  FrameError(FrameErrorCode code, const std::string& what);
  FrameErrorCode code() const { return code_; }

 private:
  FrameErrorCode code_;
};

/// Overridable for tests; the wire format caps payloads at 2^32 - 1 bytes.
inline constexpr std::uint64_t kMaxFramePayload = 0xffffffffULL;

Bytes encode_frame(const Frame& f);
Bytes encode_frame(FrameType type, std::span<const std::uint8_t> payload);

/// Parses exactly one frame occupying all of `bytes`.
Frame decode_frame(std::span<const std::uint8_t> bytes);

/// Validates a 10-byte header and returns the payload length it declares.
std::uint32_t decode_frame_header(std::span<const std::uint8_t> header, FrameType& type);

bool is_known_frame_type(std::uint8_t t);

}  // namespace fog::serving
