#include "net.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace fog::serving::net {

IoStatus read_exact(int fd, std::span<std::uint8_t> out, int timeout_ms) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::milliseconds(timeout_ms < 0 ? 0 : timeout_ms);
  std::size_t got = 0;
  while (got < out.size()) {
    if (timeout_ms >= 0) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
      if (left <= 0) return IoStatus::timeout;
      pollfd p{fd, POLLIN, 0};
      const int rc = ::poll(&p, 1, static_cast<int>(left));
      if (rc == 0) return IoStatus::timeout;
      if (rc < 0) {
        if (errno == EINTR) continue;
        return IoStatus::error;
      }
    }
    const ssize_t n = ::recv(fd, out.data() + got, out.size() - got, 0);
    if (n == 0) return IoStatus::closed;
    if (n < 0) {
      if (errno == EINTR) continue;
      return IoStatus::error;
    }
    got += static_cast<std::size_t>(n);
  }
  return IoStatus::ok;
}

IoStatus write_all(int fd, std::span<const std::uint8_t> data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return errno == EPIPE || errno == ECONNRESET ? IoStatus::closed : IoStatus::error;
    }
    sent += static_cast<std::size_t>(n);
  }
  return IoStatus::ok;
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

std::string errno_text(int err) { return std::strerror(err); }

}  // namespace fog::serving::net
