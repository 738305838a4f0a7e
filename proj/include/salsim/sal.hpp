#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "salsim/mdu.hpp"

namespace salsim {

/// Receiving application endpoint (a controller, a monitor, ...).
struct Endpoint
{
  std::uint32_t value = 0;

  friend constexpr bool operator==(Endpoint, Endpoint) = default;
  friend constexpr auto operator<=>(Endpoint, Endpoint) = default;
};

struct AckMessage
{
  MduId id;
  Slot gen_time = 0;

  friend bool operator==(const AckMessage&, const AckMessage&) = default;
};

struct PullRequest
{
  MduId id;
};

// ---------------------------------------------------------------------------
// Session handler

/// Label registration, id assignment and the subscription registry.
class SessionHandler
{
public:
  /// Assigns the next id, sequentially from 0. Throws AlreadyRegistered.
  MduId register_label(const MduLabel& label, std::string source = {});

  /// Idempotent. Throws UnknownMdu.
  void subscribe(MduId id, Endpoint subscriber);

  /// Sorted, duplicate free. Throws UnknownMdu.
  const std::vector<Endpoint>& subscribers(MduId id) const;

  std::optional<MduId> find(const MduLabel& label) const;
  const MduLabel& label(MduId id) const;
  const std::string& source(MduId id) const;

  bool registered(MduId id) const noexcept { return id.value < entries_.size(); }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Throws UnknownMdu unless `id` is registered.
  void require(MduId id) const;

private:
  struct Entry
  {
    MduLabel label;
    std::string source;
    std::vector<Endpoint> subscribers;
  };

  std::map<MduLabel, MduId> by_label_;
  std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Data handler (transmitting side)

/// Parameters of the AoI cost g(delta) used to rank one MDU.
struct AoiCostParams
{
  double a = 1.0;
  double sigma_w2 = 1.0;
};

struct PriorityPolicy
{
  enum class Kind
  {
    aoi_cost,
    fifo,
    round_robin
  };

  Kind kind = Kind::aoi_cost;
  /// Indexed by MduId; required for every registered id under aoi_cost.
  std::vector<AoiCostParams> params;
};

const char* to_string(PriorityPolicy::Kind kind) noexcept;
/// Throws ConfigValueError.
PriorityPolicy::Kind parse_policy_kind(const std::string& text);

struct DataHandlerOptions
{
  PriorityPolicy policy;
  /// "Transmit if space": fill otherwise padded capacity with samples the
  /// application filter suppressed.
  bool tis_enabled = false;
  std::size_t compound_fifo_max = 8;
  /// Drop buffered MDUs older than this many slots at selection; 0 disables.
  std::uint32_t stale_drop_slots = 0;
};

struct Selection
{
  std::vector<Mdu> mdus;
  /// How many of `mdus` came from the transmit-if-space side channel.
  std::size_t tis_count = 0;
};

class DataHandler
{
public:
  DataHandler(const SessionHandler& session, DataHandlerOptions options);

  /// Atomic ingest with freshest replacement. Throws UnknownMdu.
  void ingest(Mdu mdu);

  /// A sample the application filter suppressed. Held for transmit-if-space
  /// filling when enabled, otherwise ignored. Throws UnknownMdu.
  void ingest_suppressed(Mdu mdu);

  /// Opaque compound packet; FIFO with drop-oldest on overflow.
  void ingest_compound(Bytes packet);

  std::optional<Bytes> pop_compound();
  std::size_t compound_queue_size() const noexcept { return compound_.size(); }

  /// Transmitter-side estimate of the receiver's AoI for `id` at `now`.
  std::uint64_t rx_aoi_estimate(MduId id, Slot now) const;

  /// g(rx_aoi_estimate) under aoi_cost; the policy-specific rank otherwise.
  /// +inf for a pending pull, -inf for an empty buffer.
  double priority(MduId id, Slot now) const;

  /// Greedy fill by (priority desc, id asc) within `capacity_bytes` of
  /// serialized PDU. Selected MDUs leave the buffers.
  Selection select(std::size_t capacity_bytes, Slot now);

  /// Estimates only move forward.
  void handle_ack(const AckMessage& ack, Slot now);
  void handle_pull(const PullRequest& pull);

  const Mdu* buffered(MduId id) const;
  const Mdu* buffered_suppressed(MduId id) const;

  std::uint64_t discards() const noexcept { return discards_; }
  std::uint64_t compound_drops() const noexcept { return compound_drops_; }
  std::uint64_t stale_drops() const noexcept { return stale_drops_; }

  const DataHandlerOptions& options() const noexcept { return options_; }

private:
  struct BufferState
  {
    std::optional<Mdu> main;
    std::optional<Mdu> suppressed;
    std::int64_t last_acked_gen = -1;
    bool pulled = false;
  };

  BufferState& state(MduId id);
  const BufferState& state(MduId id) const;
  double rank(MduId id, const Mdu& m, Slot now) const;

  const SessionHandler& session_;
  DataHandlerOptions options_;
  std::vector<BufferState> buffers_;
  std::deque<Bytes> compound_;
  std::size_t rr_next_ = 0;
  std::uint64_t discards_ = 0;
  std::uint64_t compound_drops_ = 0;
  std::uint64_t stale_drops_ = 0;
};

// ---------------------------------------------------------------------------
// Data writer / data reader

/// Builds the PDU for `selection`, padded to `capacity_bytes`.
/// Throws CapacityError when the selection does not fit.
SalPdu dw_compose(std::vector<Mdu> selection, std::size_t capacity_bytes);

struct Delivery
{
  Mdu mdu;
  std::vector<Endpoint> subscribers;
};

struct ReaderOutput
{
  std::vector<Delivery> deliveries;
  std::vector<AckMessage> acks;
};

/// Receiving side: decomposes PDUs, routes MDUs to subscribers, emits ACKs
/// and pull requests.
class DataReader
{
public:
  explicit DataReader(const SessionHandler& session)
    : session_{session}
  {}

  ReaderOutput process(const SalPdu& pdu, Slot now);

  /// Throws UnknownMdu.
  PullRequest pull(MduId id) const;

  std::uint64_t unsubscribed_drops() const noexcept { return unsubscribed_drops_; }

private:
  const SessionHandler& session_;
  std::uint64_t unsubscribed_drops_ = 0;
};

} // namespace salsim
