#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fog::capsule {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

inline Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

/// Produces and checks record signatures. The capsule code only sees this
/// interface, so an asymmetric scheme can replace the keyed-hash stub.
class Signer {
 public:
  virtual ~Signer() = default;
  virtual Digest sign(const Digest& record_hash) const = 0;
  virtual bool verify(const Digest& record_hash, const Digest& signature) const;
};

/// HMAC-SHA-256 over the record hash with the owner's secret key.
class HmacSigner final : public Signer {
 public:
  explicit HmacSigner(Bytes key) : key_(std::move(key)) {}
  Digest sign(const Digest& record_hash) const override;

 private:
  Bytes key_;
};

}  // namespace fog::capsule
