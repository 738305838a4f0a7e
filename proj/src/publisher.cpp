#include "salsim/publisher.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace salsim {

void
Strategy::validate() const
{
  if (tis && kind != StrategyKind::FA)
    throw ConfigValueError{"transmit-if-space requires the FA strategy"};
}

std::string
to_string(const Strategy& s)
{
  switch (s.kind) {
    case StrategyKind::UC: return "UC";
    case StrategyKind::FC: return "FC";
    case StrategyKind::UA: return "UA";
    case StrategyKind::FA: return s.tis ? "FA+TIS" : "FA";
  }
  return "?";
}

Strategy
parse_strategy(const std::string& text)
{
  if (text == "UC")
    return {StrategyKind::UC, false};
  if (text == "FC")
    return {StrategyKind::FC, false};
  if (text == "UA")
    return {StrategyKind::UA, false};
  if (text == "FA")
    return {StrategyKind::FA, false};
  if (text == "FA+TIS")
    return {StrategyKind::FA, true};
  throw ConfigValueError{"unknown strategy '" + text + "'"};
}

DeadbandFilter::DeadbandFilter(std::size_t loops, double threshold)
  : threshold_{threshold}
  , last_(loops)
{
  if (!(threshold >= 0.0))
    throw ConfigValueError{"deadband must be >= 0"};
}

bool
DeadbandFilter::check(std::size_t loop, double value)
{
  auto& last = last_.at(loop);
  if (last && !(std::abs(value - *last) > threshold_))
    return false;
  last = value;
  return true;
}

Bytes
encode_value(double x, std::size_t size)
{
  if (size < 8)
    throw MalformedPayload{"payload size must be at least 8 bytes"};
  Bytes out(size, Byte{0});
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i)
    out[static_cast<std::size_t>(i)] = static_cast<Byte>(bits >> (56 - 8 * i));
  return out;
}

double
decode_value(std::span<const Byte> payload, std::size_t size)
{
  if (payload.size() != size || size < 8)
    throw MalformedPayload{"expected a " + std::to_string(size) + "-byte payload, got " +
                           std::to_string(payload.size())};
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < 8; ++i)
    bits = (bits << 8) | payload[i];
  return std::bit_cast<double>(bits);
}

Bytes
encode_compound(const CompoundPacket& packet)
{
  if (packet.entries.size() > 0xFFFF || packet.payload_size > 0xFFFF)
    throw CapacityError{"compound packet too large"};
  Bytes out;
  out.reserve(compound_size(packet.entries.size(), packet.payload_size));
  wire::put_u32(out, packet.gen_time);
  wire::put_u16(out, static_cast<std::uint16_t>(packet.entries.size()));
  wire::put_u16(out, static_cast<std::uint16_t>(packet.payload_size));
  for (const auto& [loop, payload] : packet.entries) {
    if (payload.size() != packet.payload_size)
      throw MalformedPayload{"compound entry payload size mismatch"};
    wire::put_u16(out, loop);
    out.insert(out.end(), payload.begin(), payload.end());
  }
  return out;
}

CompoundPacket
decode_compound(std::span<const Byte> bytes)
{
  if (bytes.size() < kCompoundHeaderSize)
    throw MalformedPayload{"compound packet shorter than its header"};
  CompoundPacket p;
  p.gen_time = wire::get_u32(bytes, 0);
  const std::size_t count = wire::get_u16(bytes, 4);
  p.payload_size = wire::get_u16(bytes, 6);
  if (bytes.size() != compound_size(count, p.payload_size))
    throw MalformedPayload{"compound packet length does not match its header"};
  p.entries.reserve(count);
  std::size_t at = kCompoundHeaderSize;
  for (std::size_t i = 0; i < count; ++i) {
    const auto loop = wire::get_u16(bytes, at);
    const auto first = bytes.begin() + static_cast<std::ptrdiff_t>(at + 2);
    p.entries.emplace_back(loop, Bytes(first, first + static_cast<std::ptrdiff_t>(p.payload_size)));
    at += 2 + p.payload_size;
  }
  return p;
}

Publisher::Publisher(std::vector<MduId> ids, Strategy strategy, double deadband, std::size_t payload_size)
  : ids_{std::move(ids)}
  , strategy_{strategy}
  , filter_{ids_.size(), deadband}
  , payload_size_{payload_size}
{
  strategy_.validate();
}

PublishOutput
Publisher::publish(std::span<const double> values, Slot now)
{
  if (values.size() != ids_.size())
    throw Error{"publisher expects one sample per loop"};

  PublishOutput out;
  out.admitted_mask.resize(values.size());
  CompoundPacket packet{now, payload_size_, {}};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool admit = !strategy_.filtered() || filter_.check(i, values[i]);
    out.admitted_mask[i] = admit;
    if (admit)
      ++out.admitted;
    if (strategy_.compound()) {
      if (admit)
        packet.entries.emplace_back(static_cast<std::uint16_t>(i), encode_value(values[i], payload_size_));
      continue;
    }
    Mdu m{ids_[i], now, encode_value(values[i], payload_size_)};
    if (admit)
      out.atomic.push_back(std::move(m));
    else if (strategy_.tis)
      out.suppressed.push_back(std::move(m));
  }
  if (strategy_.compound() && !packet.entries.empty())
    out.compound = encode_compound(packet);
  return out;
}

} // namespace salsim
