#include "fog/capsule/capsule.hpp"

#include <algorithm>

#include "fog/detail/big_endian.hpp"

namespace fog::capsule {

using detail::get_be;
using detail::put_be;

CapsuleLabel label_of(const DataCapsule& c) { return CapsuleLabel{c.capsule_id, c.privacy, c.home_domain}; }

CapsuleId capsule_id_from_name(std::string_view name) {
  const Digest d = sha256(to_bytes(name));
  CapsuleId id{};
  std::copy_n(d.begin(), id.size(), id.begin());
  return id;
}

Bytes record_hash_input(std::uint64_t seq, std::uint64_t timestamp, std::span<const std::uint8_t> payload,
                        const Digest& prev_hash) {
  Bytes buf;
  buf.reserve(16 + payload.size() + prev_hash.size());
  put_be(buf, seq);
  put_be(buf, timestamp);
  buf.insert(buf.end(), payload.begin(), payload.end());
  buf.insert(buf.end(), prev_hash.begin(), prev_hash.end());
  return buf;
}

Digest record_hash(std::uint64_t seq, std::uint64_t timestamp, std::span<const std::uint8_t> payload,
                   const Digest& prev_hash) {
  return sha256(record_hash_input(seq, timestamp, payload, prev_hash));
}

Digest append_record(DataCapsule& c, std::span<const std::uint8_t> payload, std::uint64_t timestamp,
                     const Signer& signer) {
  Record r;
  r.seq = c.records.size();
  r.timestamp = timestamp;
  r.payload.assign(payload.begin(), payload.end());
  r.prev_hash = c.records.empty() ? Digest{} : c.records.back().this_hash;
  r.this_hash = record_hash(r.seq, r.timestamp, r.payload, r.prev_hash);
  r.signature = signer.sign(r.this_hash);
  c.records.push_back(std::move(r));
  c.head = c.records.back().this_hash;
  return c.head;
}

Digest append_record(DataCapsule& c, std::span<const std::uint8_t> payload, std::uint64_t timestamp,
                     std::span<const std::uint8_t> owner_key) {
  return append_record(c, payload, timestamp, HmacSigner(Bytes(owner_key.begin(), owner_key.end())));
}

std::optional<std::size_t> verify_capsule(const DataCapsule& c, const Signer& signer) {
  Digest expected_prev{};
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const Record& r = c.records[i];
    if (r.seq != i || r.prev_hash != expected_prev) return i;
    if (record_hash(r.seq, r.timestamp, r.payload, r.prev_hash) != r.this_hash) return i;
    if (!signer.verify(r.this_hash, r.signature)) return i;
    expected_prev = r.this_hash;
  }
  if (c.head != expected_prev) return c.records.size();
  return std::nullopt;
}

std::optional<std::size_t> verify_capsule(const DataCapsule& c, std::span<const std::uint8_t> owner_key) {
  return verify_capsule(c, HmacSigner(Bytes(owner_key.begin(), owner_key.end())));
}

bool placement_allowed(const CapsuleLabel& c, const topology::NodeSpec& n) {
  return !c.is_private() || n.trust_domain == c.home_domain;
}

CapsuleFormatError::CapsuleFormatError(std::size_t offset, const std::string& what)
    : Error("capsule format error at offset " + std::to_string(offset) + ": " + what), offset_(offset) {}

Bytes serialize_capsule(const DataCapsule& c) {
  Bytes out(kCapsuleMagic.begin(), kCapsuleMagic.end());
  out.push_back(kCapsuleVersion);
  out.insert(out.end(), c.capsule_id.begin(), c.capsule_id.end());
  out.push_back(static_cast<std::uint8_t>(c.privacy));
  put_be(out, c.home_domain);
  put_be(out, static_cast<std::uint32_t>(c.records.size()));
  for (const Record& r : c.records) {
    put_be(out, r.seq);
    put_be(out, r.timestamp);
    put_be(out, static_cast<std::uint32_t>(r.payload.size()));
    out.insert(out.end(), r.payload.begin(), r.payload.end());
    out.insert(out.end(), r.prev_hash.begin(), r.prev_hash.end());
    out.insert(out.end(), r.this_hash.begin(), r.this_hash.end());
    out.insert(out.end(), r.signature.begin(), r.signature.end());
  }
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (remaining() < n)
      throw CapsuleFormatError(pos_, std::string("truncated ") + what + " (need " + std::to_string(n) +
                                         " bytes, have " + std::to_string(remaining()) + ")");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  template <typename T>
  T be(const char* what) {
    return get_be<T>(take(sizeof(T), what));
  }

  Digest digest(const char* what) {
    Digest d{};
    auto s = take(d.size(), what);
    std::copy(s.begin(), s.end(), d.begin());
    return d;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

DataCapsule parse_capsule(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  auto magic = in.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kCapsuleMagic.begin())) throw CapsuleFormatError(0, "bad magic");
  const std::size_t version_at = in.offset();
  if (in.be<std::uint8_t>("version") != kCapsuleVersion) throw CapsuleFormatError(version_at, "unsupported version");

  DataCapsule c;
  auto id = in.take(16, "capsule_id");
  std::copy(id.begin(), id.end(), c.capsule_id.begin());
  const std::size_t privacy_at = in.offset();
  const auto privacy = in.be<std::uint8_t>("privacy");
  if (privacy > 1) throw CapsuleFormatError(privacy_at, "privacy byte must be 0 or 1");
  c.privacy = static_cast<Privacy>(privacy);
  c.home_domain = in.be<std::uint32_t>("home_domain");
  const auto count = in.be<std::uint32_t>("record_count");

  Digest expected_prev{};
  // Cap the reservation by what the remaining bytes could possibly hold.
  c.records.reserve(std::min<std::size_t>(count, in.remaining() / 116));
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t record_at = in.offset();
    Record r;
    r.seq = in.be<std::uint64_t>("record seq");
    if (r.seq != i)
      throw CapsuleFormatError(record_at, "record seq " + std::to_string(r.seq) + " where " + std::to_string(i) +
                                              " was expected");
    r.timestamp = in.be<std::uint64_t>("record timestamp");
    const auto len = in.be<std::uint32_t>("payload length");
    auto payload = in.take(len, "payload");
    r.payload.assign(payload.begin(), payload.end());
    const std::size_t prev_at = in.offset();
    r.prev_hash = in.digest("prev_hash");
    if (r.prev_hash != expected_prev) throw CapsuleFormatError(prev_at, "prev_hash does not link to previous record");
    r.this_hash = in.digest("this_hash");
    r.signature = in.digest("signature");
    expected_prev = r.this_hash;
    c.records.push_back(std::move(r));
  }
  if (in.remaining() != 0) throw CapsuleFormatError(in.offset(), "trailing bytes after last record");
  c.head = expected_prev;
  return c;
}

}  // namespace fog::capsule
