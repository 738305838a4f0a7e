#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "salsim/errors.hpp"

namespace salsim {

using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;

/// Slot index. Generation times and simulation time are counted in slots.
using Slot = std::uint32_t;

inline constexpr std::size_t kDefaultPayloadSize = 20;

/// Identifier assigned by the session handler to a registered label.
struct MduId
{
  std::uint16_t value = 0;

  friend constexpr bool operator==(MduId, MduId) = default;
  friend constexpr auto operator<=>(MduId, MduId) = default;
};

/// Human readable label of a monitored quantity, e.g. "imu/position/x".
class MduLabel
{
public:
  /// Throws ConfigValueError unless 1..255 bytes.
  explicit MduLabel(std::string text);

  const std::string& text() const noexcept { return text_; }

  friend bool operator==(const MduLabel&, const MduLabel&) = default;
  friend auto operator<=>(const MduLabel&, const MduLabel&) = default;

private:
  std::string text_;
};

/// Monitored data unit: the smallest timestamped piece of process data that
/// is only meaningful when received whole.
struct Mdu
{
  MduId id;
  Slot gen_time = 0;
  Bytes payload;

  friend bool operator==(const Mdu&, const Mdu&) = default;
};

/// One SAL protocol data unit as composed by the data writer.
struct SalPdu
{
  std::vector<Mdu> entries;
  std::size_t padding_bytes = 0;

  friend bool operator==(const SalPdu&, const SalPdu&) = default;
};

inline constexpr Byte kPduVersion = 0x01;
inline constexpr std::size_t kPduHeaderSize = 2;
inline constexpr std::size_t kPduEntryOverhead = 8;
inline constexpr std::size_t kMaxPduEntries = 255;

/// Bytes one entry occupies on the wire.
constexpr std::size_t
entry_wire_size(std::size_t payload_len) noexcept
{
  return kPduEntryOverhead + payload_len;
}

/// Serialized size without padding.
std::size_t pdu_content_size(const SalPdu& pdu) noexcept;

/// Serialized size including padding.
std::size_t pdu_wire_size(const SalPdu& pdu) noexcept;

/// Wire layout (all integers big-endian):
///
///   version:u8 (0x01) | count:u8 | count * (id:u16 gen_time:u32 len:u16 payload)
///   | padding_bytes * 0x00
///
/// Throws CapacityError for more than 255 entries or a payload over 65535
/// bytes, MalformedPduError for duplicate ids.
Bytes serialize_pdu(const SalPdu& pdu);

/// Inverse of serialize_pdu. Trailing zero bytes are reported as padding.
/// Throws VersionError on an unknown version byte and MalformedPduError on
/// truncation, duplicate ids or non-zero trailing bytes.
SalPdu deserialize_pdu(std::span<const Byte> bytes);

namespace wire {

void put_u16(Bytes& out, std::uint16_t v);
void put_u32(Bytes& out, std::uint32_t v);
std::uint16_t get_u16(std::span<const Byte> in, std::size_t at);
std::uint32_t get_u32(std::span<const Byte> in, std::size_t at);

} // namespace wire

} // namespace salsim
