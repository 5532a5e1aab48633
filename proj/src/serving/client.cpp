#include "fog/serving/client.hpp"

#include <cerrno>
#include <chrono>
#include <charconv>
#include <random>

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "net.hpp"

namespace fog::serving {

std::uint64_t monotonic_us() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
    throw ClientError("endpoint must look like HOST:PORT, got '" + text + "'");
  Endpoint e;
  e.host = text.substr(0, colon);
  unsigned port = 0;
  const char* first = text.data() + colon + 1;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc{} || ptr != last || port > 65535)
    throw ClientError("bad port in endpoint '" + text + "'");
  e.port = static_cast<std::uint16_t>(port);
  return e;
}

namespace {

int connect_with_timeout(const Endpoint& ep, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw ClientError("cannot resolve '" + ep.host + "': " + ::gai_strerror(rc));

  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw ClientError("socket: " + net::errno_text(errno));
  }
  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  int err = rc == 0 ? 0 : errno;
  if (rc < 0 && err == EINPROGRESS) {
    pollfd p{fd, POLLOUT, 0};
    rc = ::poll(&p, 1, timeout_ms < 0 ? -1 : timeout_ms);
    if (rc == 0) {
      net::close_fd(fd);
      throw Timeout("connect to " + ep.host + ":" + port + " timed out");
    }
    socklen_t len = sizeof err;
    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
  }
  if (err != 0) {
    net::close_fd(fd);
    if (err == ECONNREFUSED) throw ConnectionRefused("connection to " + ep.host + ":" + port + " refused");
    throw ClientError("connect to " + ep.host + ":" + port + ": " + net::errno_text(err));
  }
  ::fcntl(fd, F_SETFL, flags);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

}  // namespace

Client::Client(const Endpoint& endpoint, int timeout_ms, std::optional<std::uint64_t> session_salt)
    : timeout_ms_(timeout_ms) {
  salt_ = session_salt ? *session_salt : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  fd_ = connect_with_timeout(endpoint, timeout_ms);
}

Client::~Client() { net::close_fd(fd_); }

RequestId Client::next_id() {
  RequestId id{};
  const std::uint64_t n = counter_++;
  for (int i = 0; i < 8; ++i) {
    id[i] = static_cast<std::uint8_t>(salt_ >> (56 - 8 * i));
    id[8 + i] = static_cast<std::uint8_t>(n >> (56 - 8 * i));
  }
  return id;
}

void Client::send_frame(const Frame& frame) {
  const auto st = net::write_all(fd_, encode_frame(frame));
  if (st != net::IoStatus::ok) throw ClientError("send failed: connection closed");
}

Frame Client::recv_frame() {
  std::array<std::uint8_t, kFrameHeaderSize> header{};
  auto check = [](net::IoStatus st) {
    if (st == net::IoStatus::timeout) throw Timeout("no response within the timeout");
    if (st == net::IoStatus::closed) throw ProtocolError("server closed the connection");
    if (st != net::IoStatus::ok) throw ClientError("receive failed: " + net::errno_text(errno));
  };
  // One deadline covers the header and the payload.
  const auto t0 = std::chrono::steady_clock::now();
  check(net::read_exact(fd_, header, timeout_ms_));
  Frame f;
  std::uint32_t len = 0;
  try {
    len = decode_frame_header(header, f.type);
  } catch (const FrameError& e) {
    throw ProtocolError(std::string("bad response frame: ") + e.what());
  }
  f.payload.resize(len);
  int left = timeout_ms_;
  if (timeout_ms_ >= 0) {
    const auto spent =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    left = std::max(1, timeout_ms_ - static_cast<int>(spent));
  }
  check(net::read_exact(fd_, f.payload, left));
  return f;
}

InferResult Client::infer(const std::string& model_id, const Bytes& input_blob) {
  InferResult out;
  out.request.request_id = next_id();
  out.request.model_id = model_id;
  out.request.input_blob = input_blob;
  out.request.t_send_us = monotonic_us();
  send_frame(request_frame(out.request));
  const Frame f = recv_frame();
  const std::uint64_t t_recv = monotonic_us();
  if (f.type == FrameType::error)
    throw ProtocolError("server error: " + std::string(f.payload.begin(), f.payload.end()));
  if (f.type != FrameType::infer_resp)
    throw ProtocolError("expected INFER_RESP, got frame type " + std::to_string(static_cast<int>(f.type)));
  try {
    out.response = decode_response(f.payload);
  } catch (const MessageError& e) {
    throw ProtocolError(std::string("bad INFER_RESP payload: ") + e.what());
  }
  if (out.response.request_id != out.request.request_id)
    throw ProtocolError("response echoes request id " + request_id_hex(out.response.request_id) + ", expected " +
                        request_id_hex(out.request.request_id));
  out.t_rtt_ms = static_cast<double>(t_recv - out.request.t_send_us) / 1000.0;
  return out;
}

double Client::ping() {
  const std::uint64_t t0 = monotonic_us();
  send_frame(Frame{FrameType::ping, {}});
  const Frame f = recv_frame();
  if (f.type != FrameType::pong) throw ProtocolError("expected PONG");
  return static_cast<double>(monotonic_us() - t0) / 1000.0;
}

}  // namespace fog::serving
