#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "salsim/mdu.hpp"

namespace salsim {

enum class LossModel
{
  /// Every transmission opportunity is erased independently.
  per_block,
  /// A compound packet's fate is drawn once, at its first fragment.
  per_packet
};

const char* to_string(LossModel m) noexcept;
LossModel parse_loss_model(const std::string& text);

struct LinkConfig
{
  double slot_duration_ms = 10.0;
  std::size_t tb_capacity = 64;
  double loss_prob = 0.10;
  LossModel loss_model = LossModel::per_block;

  /// Throws ConfigValueError. `payload_size` sets the smallest usable block.
  void validate(std::size_t payload_size) const;
};

inline constexpr std::size_t kFragmentHeaderSize = 6;

struct FragInfo
{
  std::uint16_t packet_id = 0;
  std::uint8_t index = 0;
  std::uint8_t total = 0;

  friend bool operator==(const FragInfo&, const FragInfo&) = default;
};

struct TransportBlock
{
  Bytes bytes;
  std::optional<FragInfo> frag;
};

enum class TxOutcome
{
  delivered,
  erased
};

/// Maps one 64-bit draw to an erasure decision with probability `p`.
inline bool
erased_from_draw(std::uint64_t draw, double p) noexcept
{
  const double u = static_cast<double>(draw >> 11) * 0x1.0p-53;
  return u < p;
}

/// Bernoulli erasure channel. Every call to next_erasure() or transmit()
/// consumes exactly one value of the stream, whatever the outcome.
class ErasureChannel
{
public:
  ErasureChannel(double loss_prob, std::uint64_t seed);

  bool next_erasure();
  TxOutcome transmit(const TransportBlock& tb);

  std::uint64_t draws() const noexcept { return draws_; }
  double loss_prob() const noexcept { return p_; }

private:
  double p_;
  std::mt19937_64 rng_;
  std::uint64_t draws_ = 0;
};

/// Splits `packet` into blocks of at most `tb_capacity` bytes, each carrying a
/// 6-byte header (packet id:u16, index:u8, total:u8, chunk length:u16).
/// Throws CapacityError if the capacity leaves no room for data or more than
/// 255 fragments would be needed.
std::vector<TransportBlock> fragment(std::span<const Byte> packet, std::size_t tb_capacity,
                                     std::uint16_t packet_id);

/// Number of fragments fragment() produces.
std::size_t fragment_count(std::size_t packet_len, std::size_t tb_capacity);

struct Fragment
{
  FragInfo info;
  Bytes chunk;
};

/// Throws MalformedPduError on a short or inconsistent block.
Fragment parse_fragment(std::span<const Byte> block);

/// Receiver side reassembly. Only delivered blocks are pushed; a gap in the
/// index sequence or a new packet id voids the partial packet.
class Reassembler
{
public:
  /// Returns the complete packet once its last fragment arrives intact.
  std::optional<Bytes> push(std::span<const Byte> block);

  /// Delivered fragments thrown away because their packet was incomplete.
  std::uint64_t discarded_fragments() const noexcept { return discarded_; }

private:
  void void_partial();

  std::optional<FragInfo> current_;
  std::uint8_t expected_ = 0;
  Bytes buffer_;
  std::uint64_t discarded_ = 0;
};

} // namespace salsim
