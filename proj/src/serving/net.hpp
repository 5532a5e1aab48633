#pragma once

// POSIX socket helpers shared by the live server and the client.

#include <cstdint>
#include <span>
#include <string>

namespace fog::serving::net {

enum class IoStatus { ok, closed, timeout, error };

/// timeout_ms < 0 waits forever.
IoStatus read_exact(int fd, std::span<std::uint8_t> out, int timeout_ms);
IoStatus write_all(int fd, std::span<const std::uint8_t> data);

void close_fd(int& fd);
std::string errno_text(int err);

}  // namespace fog::serving::net
