#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fog/serving/messages.hpp"

namespace fog::serving {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// "HOST:PORT"
Endpoint parse_endpoint(const std::string& text);

class ClientError : public Error {
 public:
  using Error::Error;
};
class Timeout : public ClientError {
 public:
  using ClientError::ClientError;
};
class ConnectionRefused : public ClientError {
 public:
  using ClientError::ClientError;
};
class ProtocolError : public ClientError {
 public:
  using ClientError::ClientError;
};

struct InferResult {
  InferenceRequest request;
  InferenceResponse response;
  double t_rtt_ms = 0.0;  // from t_send (taken before encoding) to full receipt
};

/// Blocking client on one connection. Request ids are an 8-byte session salt
/// followed by an 8-byte big-endian counter, which keeps them unique within
/// the session.
class Client {
 public:
  Client(const Endpoint& endpoint, int timeout_ms, std::optional<std::uint64_t> session_salt = std::nullopt);
  ~Client();

  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  InferResult infer(const std::string& model_id, const Bytes& input_blob);
  /// Round-trip time of a PING/PONG exchange in ms.
  double ping();

  void send_frame(const Frame& frame);
  Frame recv_frame();

  void set_timeout_ms(int ms) { timeout_ms_ = ms; }

 private:
  RequestId next_id();

  int fd_ = -1;
  int timeout_ms_;
  std::uint64_t salt_;
  std::uint64_t counter_ = 0;
};

/// Monotonic clock in µs, used for client-side t_send.
std::uint64_t monotonic_us();

}  // namespace fog::serving
