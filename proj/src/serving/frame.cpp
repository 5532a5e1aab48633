#include "fog/serving/frame.hpp"

#include <algorithm>

#include "fog/detail/big_endian.hpp"

namespace fog::serving {

std::string_view to_string(FrameErrorCode code) {
  switch (code) {
    case FrameErrorCode::bad_magic: return "BadMagic";
    case FrameErrorCode::bad_version: return "BadVersion";
    case FrameErrorCode::unknown_type: return "UnknownType";
    case FrameErrorCode::truncated: return "Truncated";
    case FrameErrorCode::too_large: return "TooLarge";
    case FrameErrorCode::trailing_bytes: return "TrailingBytes";
  }
  return "?";
}

FrameError::FrameError(FrameErrorCode code, const std::string& what)
    : Error(std::string(to_string(code)) + ": " + what), code_(code) {}

bool is_known_frame_type(std::uint8_t t) { return t >= 0x01 && t <= 0x05; }

Bytes encode_frame(FrameType type, std::span<const std::uint8_t> payload) {
  if (!is_known_frame_type(static_cast<std::uint8_t>(type)))
    throw FrameError(FrameErrorCode::unknown_type, "cannot encode frame type " +
                                                       std::to_string(static_cast<int>(type)));
  if (payload.size() > kMaxFramePayload)
    throw FrameError(FrameErrorCode::too_large, "payload exceeds 2^32-1 bytes");
  Bytes out(kFrameMagic.begin(), kFrameMagic.end());
  out.reserve(kFrameHeaderSize + payload.size());
  out.push_back(kFrameVersion);
  out.push_back(static_cast<std::uint8_t>(type));
  detail::put_be(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Bytes encode_frame(const Frame& f) { return encode_frame(f.type, f.payload); }

std::uint32_t decode_frame_header(std::span<const std::uint8_t> header, FrameType& type) {
  const std::size_t magic_have = std::min(header.size(), kFrameMagic.size());
  if (!std::equal(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(magic_have), kFrameMagic.begin()))
    throw FrameError(FrameErrorCode::bad_magic, "frame does not start with FRS1");
  if (header.size() < kFrameHeaderSize)
    throw FrameError(FrameErrorCode::truncated, "header needs 10 bytes, have " + std::to_string(header.size()));
  if (header[4] != kFrameVersion)
    throw FrameError(FrameErrorCode::bad_version, "unsupported version " + std::to_string(header[4]));
  if (!is_known_frame_type(header[5]))
    throw FrameError(FrameErrorCode::unknown_type, "unknown frame type " + std::to_string(header[5]));
  type = static_cast<FrameType>(header[5]);
  return detail::get_be<std::uint32_t>(header.subspan(6, 4));
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  Frame f;
  const std::uint32_t len = decode_frame_header(bytes, f.type);
  const std::size_t have = bytes.size() - kFrameHeaderSize;
  if (have < len)
    throw FrameError(FrameErrorCode::truncated,
                     "declared length " + std::to_string(len) + ", " + std::to_string(have) + " payload bytes present");
  if (have > len)
    throw FrameError(FrameErrorCode::trailing_bytes, std::to_string(have - len) + " bytes after payload");
  f.payload.assign(bytes.begin() + kFrameHeaderSize, bytes.end());
  return f;
}

}  // namespace fog::serving
