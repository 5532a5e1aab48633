#include "fog/serving/messages.hpp"

#include <algorithm>

#include "fog/detail/big_endian.hpp"

namespace fog::serving {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::model_not_found: return "model_not_found";
    case Status::malformed: return "malformed";
    case Status::overloaded: return "overloaded";
  }
  return "?";
}

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* field) {
    if (in_.size() - pos_ < n)
      throw MessageError(std::string("payload truncated in ") + field + " at offset " + std::to_string(pos_));
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T be(const char* field) {
    return detail::get_be<T>(take(sizeof(T), field));
  }

  void done() const {
    if (pos_ != in_.size())
      throw MessageError(std::to_string(in_.size() - pos_) + " trailing bytes after message at offset " +
                         std::to_string(pos_));
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void put_id(Bytes& out, const RequestId& id) { out.insert(out.end(), id.begin(), id.end()); }

RequestId get_id(Reader& r) {
  RequestId id;
  auto s = r.take(id.size(), "request_id");
  std::copy(s.begin(), s.end(), id.begin());
  return id;
}

}  // namespace

Bytes encode_request(const InferenceRequest& r) {
  if (r.model_id.size() > 0xffff) throw MessageError("model_id longer than 65535 bytes");
  if (r.input_blob.size() > 0xffffffffULL) throw MessageError("input_blob longer than 2^32-1 bytes");
  Bytes out;
  out.reserve(16 + 2 + r.model_id.size() + 4 + r.input_blob.size() + 8);
  put_id(out, r.request_id);
  detail::put_be(out, static_cast<std::uint16_t>(r.model_id.size()));
  out.insert(out.end(), r.model_id.begin(), r.model_id.end());
  detail::put_be(out, static_cast<std::uint32_t>(r.input_blob.size()));
  out.insert(out.end(), r.input_blob.begin(), r.input_blob.end());
  detail::put_be(out, r.t_send_us);
  return out;
}

InferenceRequest decode_request(std::span<const std::uint8_t> payload) {
  Reader rd(payload);
  InferenceRequest r;
  r.request_id = get_id(rd);
  const auto id_len = rd.be<std::uint16_t>("model_id length");
  auto id = rd.take(id_len, "model_id");
  r.model_id.assign(id.begin(), id.end());
  const auto blob_len = rd.be<std::uint32_t>("input_blob length");
  auto blob = rd.take(blob_len, "input_blob");
  r.input_blob.assign(blob.begin(), blob.end());
  r.t_send_us = rd.be<std::uint64_t>("t_send");
  rd.done();
  return r;
}

Bytes encode_response(const InferenceResponse& r) {
  if (r.result_blob.size() > 0xffffffffULL) throw MessageError("result_blob longer than 2^32-1 bytes");
  Bytes out;
  out.reserve(16 + 1 + 8 + 4 + r.result_blob.size());
  put_id(out, r.request_id);
  out.push_back(static_cast<std::uint8_t>(r.status));
  detail::put_be(out, r.t_inf_us);
  detail::put_be(out, static_cast<std::uint32_t>(r.result_blob.size()));
  out.insert(out.end(), r.result_blob.begin(), r.result_blob.end());
  return out;
}

InferenceResponse decode_response(std::span<const std::uint8_t> payload) {
  Reader rd(payload);
  InferenceResponse r;
  r.request_id = get_id(rd);
  const auto status = rd.be<std::uint8_t>("status");
  if (status > 3) throw MessageError("unknown status code " + std::to_string(status));
  r.status = static_cast<Status>(status);
  r.t_inf_us = rd.be<std::uint64_t>("t_inf");
  const auto len = rd.be<std::uint32_t>("result_blob length");
  auto blob = rd.take(len, "result_blob");
  r.result_blob.assign(blob.begin(), blob.end());
  rd.done();
  return r;
}

Frame request_frame(const InferenceRequest& r) { return Frame{FrameType::infer_req, encode_request(r)}; }
Frame response_frame(const InferenceResponse& r) { return Frame{FrameType::infer_resp, encode_response(r)}; }
Frame error_frame(std::string_view message) {
  return Frame{FrameType::error, Bytes(message.begin(), message.end())};
}

std::string request_id_hex(const RequestId& id) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (auto b : id) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

}  // namespace fog::serving
