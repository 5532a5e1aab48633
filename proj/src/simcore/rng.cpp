#include "fog/simcore/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fog::simcore {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_id_for(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

bool finite(double v) { return std::isfinite(v); }

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  for (auto& word : s_) word = splitmix64(seed);
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

void validate(const DistSpec& dist) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Constant>) {
          if (!finite(d.value)) throw ParameterError("constant distribution: non-finite value");
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (!finite(d.lo) || !finite(d.hi)) throw ParameterError("uniform distribution: non-finite bound");
          if (d.lo > d.hi) throw ParameterError("uniform distribution: lo > hi");
        } else {
          if (!finite(d.mean) || !finite(d.std) || !finite(d.min))
            throw ParameterError("truncated normal: non-finite parameter");
          if (d.std < 0.0) throw ParameterError("truncated normal: std < 0");
        }
      },
      dist);
}

double mean(const DistSpec& dist) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return 0.5 * (d.lo + d.hi);
        } else {
          if (d.std == 0.0) return std::max(d.mean, d.min);
          const double alpha = (d.min - d.mean) / d.std;
          const double tail = normal_sf(alpha);
          if (tail < 1e-300) return d.min;
          return d.mean + d.std * normal_pdf(alpha) / tail;
        }
      },
      dist);
}

double support_min(const DistSpec& dist) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return d.lo;
        } else {
          return d.min;
        }
      },
      dist);
}

RngStream::RngStream(std::uint64_t root_seed, std::uint64_t stream_id)
    : root_seed_(root_seed), stream_id_(stream_id), gen_([&] {
        std::uint64_t mix = root_seed;
        const std::uint64_t a = splitmix64(mix);
        std::uint64_t mix2 = stream_id ^ a;
        return splitmix64(mix2);
      }()) {}

double RngStream::uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

double RngStream::standard_normal() { return normal_(gen_); }

double RngStream::exponential(double rate) {
  if (!(rate > 0.0) || !finite(rate)) throw ParameterError("exponential: rate must be positive");
  return -std::log1p(-uniform01()) / rate;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw ParameterError("below: empty range");
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
}

double RngStream::draw(const DistSpec& dist) {
  validate(dist);
  return std::visit(
      [this](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return d.lo + (d.hi - d.lo) * uniform01();
        } else {
          if (d.std == 0.0) return std::max(d.mean, d.min);
          for (int attempt = 0; attempt < kMaxResample; ++attempt) {
            const double x = d.mean + d.std * standard_normal();
            if (x >= d.min) return x;
          }
          return d.min;
        }
      },
      dist);
}

}  // namespace fog::simcore
