#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <variant>

#include "fog/error.hpp"

namespace fog::simcore {

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// splitmix64 step; used to expand seeds and to derive stream ids.
std::uint64_t splitmix64(std::uint64_t& state);

/// 64-bit FNV-1a over the bytes of `text`. Stable across platforms, so entity
/// names map to the same stream id everywhere.
std::uint64_t stream_id_for(std::string_view text);

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  bool operator==(const Xoshiro256&) const = default;

 private:
  std::array<std::uint64_t, 4> s_{};
};

struct Constant {
  double value = 0.0;
};

struct Uniform {
  double lo = 0.0;
  double hi = 0.0;
};

/// Normal(mean, std) conditioned on draws >= min. Realized by rejection
/// (at most kMaxResample tries) followed by a clamp to `min`.
struct TruncNormal {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
};

using DistSpec = std::variant<Constant, Uniform, TruncNormal>;

inline constexpr int kMaxResample = 64;

/// Throws ParameterError for a > b, std < 0 or non-finite parameters.
void validate(const DistSpec& dist);

/// Analytic mean of the realized distribution. For TruncNormal this is the
/// mean of the normal conditioned on >= min (the clamp fallback after
/// kMaxResample rejections is ignored; its mass is below 1e-12 whenever the
/// acceptance probability exceeds 0.35).
double mean(const DistSpec& dist);

/// Smallest value the distribution can produce.
double support_min(const DistSpec& dist);

/// One seeded, independent sequence of draws. Identical (root_seed,
/// stream_id) pairs produce identical sequences.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::uint64_t stream_id);
  RngStream(std::uint64_t root_seed, std::string_view entity)
      : RngStream(root_seed, stream_id_for(entity)) {}

  std::uint64_t root_seed() const { return root_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double draw(const DistSpec& dist);

  /// Uniform on [0, 1) with 53 bits of precision.
  double uniform01();
  double standard_normal();
  /// Exponential with the given rate (events per unit).
  double exponential(double rate);
  std::uint64_t next_u64() { return gen_(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Xoshiro256& engine() { return gen_; }

 private:
  std::uint64_t root_seed_;
  std::uint64_t stream_id_;
  Xoshiro256 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Free-function form of RngStream::draw.
inline double rng_draw(RngStream& stream, const DistSpec& dist) { return stream.draw(dist); }

}  // namespace fog::simcore
