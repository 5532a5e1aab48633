#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fog::detail {

template <typename T>
void put_be(std::vector<std::uint8_t>& out, T value) {
  for (int shift = 8 * (static_cast<int>(sizeof(T)) - 1); shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> shift));
}

template <typename T>
T get_be(std::span<const std::uint8_t> in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v = (v << 8) | in[i];
  return static_cast<T>(v);
}

}  // namespace fog::detail
