#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salsim/mdu.hpp"

namespace salsim {

enum class StrategyKind
{
  UC, ///< unfiltered compound
  FC, ///< filtered compound
  UA, ///< unfiltered atomic
  FA  ///< filtered atomic
};

struct Strategy
{
  StrategyKind kind = StrategyKind::UA;
  /// Transmit-if-space; only valid with FA.
  bool tis = false;

  bool compound() const noexcept { return kind == StrategyKind::UC || kind == StrategyKind::FC; }
  bool filtered() const noexcept { return kind == StrategyKind::FC || kind == StrategyKind::FA; }

  /// Throws ConfigValueError when tis is set on anything but FA.
  void validate() const;

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

/// "UC", "FC", "UA", "FA" or "FA+TIS".
std::string to_string(const Strategy& s);
/// Accepts the names produced by to_string. Throws ConfigValueError.
Strategy parse_strategy(const std::string& text);

/// OPC UA style absolute deadband. Admits a sample when it moved more than
/// the threshold away from the last admitted one. It never learns whether an
/// admitted sample actually reached the receiver.
class DeadbandFilter
{
public:
  DeadbandFilter(std::size_t loops, double threshold);

  bool check(std::size_t loop, double value);

  double threshold() const noexcept { return threshold_; }
  std::optional<double> last_admitted(std::size_t loop) const { return last_.at(loop); }

private:
  double threshold_;
  std::vector<std::optional<double>> last_;
};

/// 8-byte big-endian IEEE-754 double followed by zero fill up to `size`.
Bytes encode_value(double x, std::size_t size = kDefaultPayloadSize);
/// Throws MalformedPayload unless `payload.size() == size`.
double decode_value(std::span<const Byte> payload, std::size_t size = kDefaultPayloadSize);

/// Application packet of the compound strategies. Opaque to the SAL.
///
///   gen_time:u32 | count:u16 | payload_size:u16 | count * (loop:u16 payload)
struct CompoundPacket
{
  Slot gen_time = 0;
  std::size_t payload_size = kDefaultPayloadSize;
  /// (loop, payload) in publication order.
  std::vector<std::pair<std::uint16_t, Bytes>> entries;

  friend bool operator==(const CompoundPacket&, const CompoundPacket&) = default;
};

inline constexpr std::size_t kCompoundHeaderSize = 8;

/// Encoded size of a compound packet carrying `count` values.
constexpr std::size_t
compound_size(std::size_t count, std::size_t payload_size) noexcept
{
  return kCompoundHeaderSize + count * (2 + payload_size);
}

/// Throws MalformedPayload on a payload size mismatch.
Bytes encode_compound(const CompoundPacket& packet);
/// Throws MalformedPayload.
CompoundPacket decode_compound(std::span<const Byte> bytes);

struct PublishOutput
{
  std::vector<Mdu> atomic;
  /// Filtered-out atomic samples handed to the SAL for transmit-if-space.
  std::vector<Mdu> suppressed;
  std::optional<Bytes> compound;
  /// Filter decision per loop; all true for unfiltered strategies.
  std::vector<bool> admitted_mask;
  std::size_t admitted = 0;
};

/// The single transmitting application: samples every loop once per slot and
/// packs the samples according to its strategy.
class Publisher
{
public:
  Publisher(std::vector<MduId> ids, Strategy strategy, double deadband,
            std::size_t payload_size = kDefaultPayloadSize);

  PublishOutput publish(std::span<const double> values, Slot now);

  const Strategy& strategy() const noexcept { return strategy_; }
  const DeadbandFilter& filter() const noexcept { return filter_; }

private:
  std::vector<MduId> ids_;
  Strategy strategy_;
  DeadbandFilter filter_;
  std::size_t payload_size_;
};

} // namespace salsim
