#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fog/capsule/crypto.hpp"
#include "fog/error.hpp"
#include "fog/topology/topology.hpp"

namespace fog::capsule {

using CapsuleId = std::array<std::uint8_t, 16>;

enum class Privacy : std::uint8_t { public_data = 0, private_data = 1 };

struct Record {
  std::uint64_t seq = 0;
  std::uint64_t timestamp = 0;  // microseconds
  Bytes payload;
  Digest prev_hash{};
  Digest this_hash{};
  Digest signature{};

  bool operator==(const Record&) const = default;
};

/// Append-only, hash-chained record container. Record 0 links to 32 zero
/// bytes; record i links to record i-1; head is the last record's hash.
struct DataCapsule {
  CapsuleId capsule_id{};
  std::string owner_key_id;
  Privacy privacy = Privacy::public_data;
  topology::DomainId home_domain = 0;
  std::vector<Record> records;
  Digest head{};

  bool operator==(const DataCapsule&) const = default;
};

/// The privacy facts about a capsule that placement and model governance need.
struct CapsuleLabel {
  CapsuleId capsule_id{};
  Privacy privacy = Privacy::public_data;
  topology::DomainId home_domain = 0;

  bool is_private() const { return privacy == Privacy::private_data; }
};

CapsuleLabel label_of(const DataCapsule& c);

/// Stable 16-byte id for a human-readable capsule name (first half of its SHA-256).
CapsuleId capsule_id_from_name(std::string_view name);

/// seq(8 BE) || timestamp(8 BE) || payload || prev_hash: the bytes hashed into this_hash.
Bytes record_hash_input(std::uint64_t seq, std::uint64_t timestamp, std::span<const std::uint8_t> payload,
                        const Digest& prev_hash);
Digest record_hash(std::uint64_t seq, std::uint64_t timestamp, std::span<const std::uint8_t> payload,
                   const Digest& prev_hash);

/// Extends the chain by one signed record and returns the new head.
Digest append_record(DataCapsule& c, std::span<const std::uint8_t> payload, std::uint64_t timestamp,
                     const Signer& signer);
Digest append_record(DataCapsule& c, std::span<const std::uint8_t> payload, std::uint64_t timestamp,
                     std::span<const std::uint8_t> owner_key);

/// nullopt when every record checks out; otherwise the index of the first
/// record whose seq, link, hash or signature fails. A stale head is reported
/// as index records.size().
std::optional<std::size_t> verify_capsule(const DataCapsule& c, const Signer& signer);
std::optional<std::size_t> verify_capsule(const DataCapsule& c, std::span<const std::uint8_t> owner_key);

bool placement_allowed(const CapsuleLabel& c, const topology::NodeSpec& n);
inline bool placement_allowed(const DataCapsule& c, const topology::NodeSpec& n) {
  return placement_allowed(label_of(c), n);
}

class CapsuleFormatError : public Error {
 public:
  CapsuleFormatError(std::size_t offset, const std::string& what);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

inline constexpr std::array<std::uint8_t, 4> kCapsuleMagic{'C', 'A', 'P', 'S'};
inline constexpr std::uint8_t kCapsuleVersion = 0x01;
/// Bytes before the first record: magic, version, id, privacy, domain, count.
inline constexpr std::size_t kCapsuleHeaderSize = 4 + 1 + 16 + 1 + 4 + 4;

/// Capsule file encoding. owner_key_id is not part of the file.
Bytes serialize_capsule(const DataCapsule& c);
/// Rejects bad magic/version, truncation, trailing bytes, non-contiguous seq
/// and broken prev-hash links; the error carries the byte offset.
DataCapsule parse_capsule(std::span<const std::uint8_t> bytes);

}  // namespace fog::capsule
