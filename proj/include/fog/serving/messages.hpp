#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "fog/serving/frame.hpp"

namespace fog::serving {

enum class Status : std::uint8_t { ok = 0, model_not_found = 1, malformed = 2, overloaded = 3 };

std::string_view to_string(Status s);

/// request_id (16) | model_id (u16 len + bytes) | input_blob (u32 len + bytes) | t_send_us (u64)
struct InferenceRequest {
  RequestId request_id{};
  std::string model_id;
  Bytes input_blob;
  std::uint64_t t_send_us = 0;

  bool operator==(const InferenceRequest&) const = default;
};

/// request_id (16) | status (u8) | t_inf_us (u64) | result_blob (u32 len + bytes)
struct InferenceResponse {
  RequestId request_id{};
  Status status = Status::ok;
  std::uint64_t t_inf_us = 0;
  Bytes result_blob;

  bool operator==(const InferenceResponse&) const = default;
};

class MessageError : public Error {
 public:
  using Error::Error;
};

Bytes encode_request(const InferenceRequest& r);
InferenceRequest decode_request(std::span<const std::uint8_t> payload);

Bytes encode_response(const InferenceResponse& r);
InferenceResponse decode_response(std::span<const std::uint8_t> payload);

Frame request_frame(const InferenceRequest& r);
Frame response_frame(const InferenceResponse& r);
/// ERROR frames carry a UTF-8 diagnostic.
Frame error_frame(std::string_view message);

std::string request_id_hex(const RequestId& id);

}  // namespace fog::serving
