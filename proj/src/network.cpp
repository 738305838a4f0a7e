#include "salsim/network.hpp"

#include <algorithm>

namespace salsim {

const char*
to_string(LossModel m) noexcept
{
  return m == LossModel::per_block ? "per_block" : "per_packet";
}

LossModel
parse_loss_model(const std::string& text)
{
  if (text == "per_block")
    return LossModel::per_block;
  if (text == "per_packet")
    return LossModel::per_packet;
  throw ConfigValueError{"unknown loss model '" + text + "'"};
}

void
LinkConfig::validate(std::size_t payload_size) const
{
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0))
    throw ConfigValueError{"loss_prob must lie in [0, 1]"};
  if (tb_capacity < kPduHeaderSize + entry_wire_size(payload_size))
    throw ConfigValueError{"tb_capacity " + std::to_string(tb_capacity) +
                           " cannot hold a PDU header and one entry"};
  if (!(slot_duration_ms > 0.0))
    throw ConfigValueError{"slot duration must be positive"};
}

ErasureChannel::ErasureChannel(double loss_prob, std::uint64_t seed)
  : p_{loss_prob}
  , rng_{seed}
{}

bool
ErasureChannel::next_erasure()
{
  ++draws_;
  return erased_from_draw(rng_(), p_);
}

TxOutcome
ErasureChannel::transmit(const TransportBlock& /*tb*/)
{
  return next_erasure() ? TxOutcome::erased : TxOutcome::delivered;
}

std::size_t
fragment_count(std::size_t packet_len, std::size_t tb_capacity)
{
  if (tb_capacity <= kFragmentHeaderSize)
    throw CapacityError{"transport block too small for a fragment header"};
  const auto room = tb_capacity - kFragmentHeaderSize;
  return std::max<std::size_t>(1, (packet_len + room - 1) / room);
}

std::vector<TransportBlock>
fragment(std::span<const Byte> packet, std::size_t tb_capacity, std::uint16_t packet_id)
{
  const auto total = fragment_count(packet.size(), tb_capacity);
  if (total > 255)
    throw CapacityError{"packet of " + std::to_string(packet.size()) + " bytes needs more than 255 fragments"};
  const auto room = std::min<std::size_t>(tb_capacity - kFragmentHeaderSize, 0xFFFF);

  std::vector<TransportBlock> out;
  out.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const auto begin = i * room;
    const auto len = std::min(room, packet.size() - std::min(begin, packet.size()));
    TransportBlock tb;
    tb.frag = FragInfo{packet_id, static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(total)};
    tb.bytes.reserve(kFragmentHeaderSize + len);
    wire::put_u16(tb.bytes, packet_id);
    tb.bytes.push_back(static_cast<Byte>(i));
    tb.bytes.push_back(static_cast<Byte>(total));
    wire::put_u16(tb.bytes, static_cast<std::uint16_t>(len));
    const auto first = packet.begin() + static_cast<std::ptrdiff_t>(begin);
    tb.bytes.insert(tb.bytes.end(), first, first + static_cast<std::ptrdiff_t>(len));
    out.push_back(std::move(tb));
  }
  return out;
}

Fragment
parse_fragment(std::span<const Byte> block)
{
  if (block.size() < kFragmentHeaderSize)
    throw MalformedPduError{"fragment shorter than its header"};
  Fragment f;
  f.info.packet_id = wire::get_u16(block, 0);
  f.info.index = block[2];
  f.info.total = block[3];
  const std::size_t len = wire::get_u16(block, 4);
  if (f.info.total == 0 || f.info.index >= f.info.total)
    throw MalformedPduError{"fragment index out of range"};
  if (block.size() < kFragmentHeaderSize + len)
    throw MalformedPduError{"truncated fragment"};
  f.chunk.assign(block.begin() + kFragmentHeaderSize,
                 block.begin() + static_cast<std::ptrdiff_t>(kFragmentHeaderSize + len));
  return f;
}

void
Reassembler::void_partial()
{
  discarded_ += expected_;
  current_.reset();
  buffer_.clear();
  expected_ = 0;
}

std::optional<Bytes>
Reassembler::push(std::span<const Byte> block)
{
  auto f = parse_fragment(block);
  const bool continues = current_ && current_->packet_id == f.info.packet_id &&
                         current_->total == f.info.total && f.info.index == expected_;
  if (!continues) {
    void_partial();
    if (f.info.index != 0) {
      // joined mid-packet: the head was lost
      ++discarded_;
      return std::nullopt;
    }
    current_ = f.info;
  }
  buffer_.insert(buffer_.end(), f.chunk.begin(), f.chunk.end());
  ++expected_;
  if (expected_ == current_->total) {
    Bytes done = std::move(buffer_);
    current_.reset();
    buffer_.clear();
    expected_ = 0;
    return done;
  }
  return std::nullopt;
}

} // namespace salsim
