#include "salsim/mdu.hpp"

#include <algorithm>
#include <limits>

namespace salsim {

MduLabel::MduLabel(std::string text)
  : text_{std::move(text)}
{
  if (text_.empty() || text_.size() > 255)
    throw ConfigValueError{"MDU label must be 1..255 bytes, got " + std::to_string(text_.size())};
}

namespace wire {

void
put_u16(Bytes& out, std::uint16_t v)
{
  out.push_back(static_cast<Byte>(v >> 8));
  out.push_back(static_cast<Byte>(v));
}

void
put_u32(Bytes& out, std::uint32_t v)
{
  out.push_back(static_cast<Byte>(v >> 24));
  out.push_back(static_cast<Byte>(v >> 16));
  out.push_back(static_cast<Byte>(v >> 8));
  out.push_back(static_cast<Byte>(v));
}

std::uint16_t
get_u16(std::span<const Byte> in, std::size_t at)
{
  return static_cast<std::uint16_t>((in[at] << 8) | in[at + 1]);
}

std::uint32_t
get_u32(std::span<const Byte> in, std::size_t at)
{
  return (std::uint32_t{in[at]} << 24) | (std::uint32_t{in[at + 1]} << 16) |
         (std::uint32_t{in[at + 2]} << 8) | std::uint32_t{in[at + 3]};
}

} // namespace wire

std::size_t
pdu_content_size(const SalPdu& pdu) noexcept
{
  std::size_t n = kPduHeaderSize;
  for (const auto& e : pdu.entries)
    n += entry_wire_size(e.payload.size());
  return n;
}

std::size_t
pdu_wire_size(const SalPdu& pdu) noexcept
{
  return pdu_content_size(pdu) + pdu.padding_bytes;
}

namespace {

bool
has_duplicate_ids(const std::vector<Mdu>& entries)
{
  std::vector<std::uint16_t> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries)
    ids.push_back(e.id.value);
  std::sort(ids.begin(), ids.end());
  return std::adjacent_find(ids.begin(), ids.end()) != ids.end();
}

} // namespace

Bytes
serialize_pdu(const SalPdu& pdu)
{
  if (pdu.entries.size() > kMaxPduEntries)
    throw CapacityError{"PDU holds " + std::to_string(pdu.entries.size()) + " entries, limit is 255"};
  if (has_duplicate_ids(pdu.entries))
    throw MalformedPduError{"duplicate MDU id in PDU"};

  Bytes out;
  out.reserve(pdu_wire_size(pdu));
  out.push_back(kPduVersion);
  out.push_back(static_cast<Byte>(pdu.entries.size()));
  for (const auto& e : pdu.entries) {
    if (e.payload.size() > std::numeric_limits<std::uint16_t>::max())
      throw CapacityError{"MDU payload exceeds 65535 bytes"};
    wire::put_u16(out, e.id.value);
    wire::put_u32(out, e.gen_time);
    wire::put_u16(out, static_cast<std::uint16_t>(e.payload.size()));
    out.insert(out.end(), e.payload.begin(), e.payload.end());
  }
  out.resize(out.size() + pdu.padding_bytes, Byte{0});
  return out;
}

SalPdu
deserialize_pdu(std::span<const Byte> bytes)
{
  if (bytes.size() < kPduHeaderSize)
    throw MalformedPduError{"PDU shorter than its header"};
  if (bytes[0] != kPduVersion)
    throw VersionError{"unsupported SAL PDU version " + std::to_string(bytes[0])};

  SalPdu pdu;
  const std::size_t count = bytes[1];
  pdu.entries.reserve(count);
  std::size_t at = kPduHeaderSize;
  for (std::size_t i = 0; i < count; ++i) {
    if (bytes.size() < at + kPduEntryOverhead)
      throw MalformedPduError{"truncated entry header"};
    Mdu m;
    m.id = MduId{wire::get_u16(bytes, at)};
    m.gen_time = wire::get_u32(bytes, at + 2);
    const std::size_t len = wire::get_u16(bytes, at + 6);
    at += kPduEntryOverhead;
    if (bytes.size() < at + len)
      throw MalformedPduError{"truncated entry payload"};
    m.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(at),
                     bytes.begin() + static_cast<std::ptrdiff_t>(at + len));
    at += len;
    pdu.entries.push_back(std::move(m));
  }
  if (has_duplicate_ids(pdu.entries))
    throw MalformedPduError{"duplicate MDU id in PDU"};

  const auto tail = bytes.subspan(at);
  if (std::any_of(tail.begin(), tail.end(), [](Byte b) { return b != 0; }))
    throw MalformedPduError{"non-zero bytes after last entry"};
  pdu.padding_bytes = tail.size();
  return pdu;
}

} // namespace salsim
