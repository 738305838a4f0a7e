#include "salsim/sal.hpp"

#include <algorithm>
#include <limits>

#include "salsim/control.hpp"

namespace salsim {

namespace {

std::string
id_text(MduId id)
{
  return std::to_string(id.value);
}

} // namespace

// ---------------------------------------------------------------------------
// SessionHandler

MduId
SessionHandler::register_label(const MduLabel& label, std::string source)
{
  if (by_label_.contains(label))
    throw AlreadyRegistered{"MDU label already registered: " + label.text()};
  if (entries_.size() > std::numeric_limits<std::uint16_t>::max())
    throw CapacityError{"MDU id space exhausted"};
  const MduId id{static_cast<std::uint16_t>(entries_.size())};
  by_label_.emplace(label, id);
  entries_.push_back(Entry{label, std::move(source), {}});
  return id;
}

void
SessionHandler::require(MduId id) const
{
  if (!registered(id))
    throw UnknownMdu{"unknown MDU id " + id_text(id)};
}

void
SessionHandler::subscribe(MduId id, Endpoint subscriber)
{
  require(id);
  auto& subs = entries_[id.value].subscribers;
  const auto it = std::lower_bound(subs.begin(), subs.end(), subscriber);
  if (it == subs.end() || *it != subscriber)
    subs.insert(it, subscriber);
}

const std::vector<Endpoint>&
SessionHandler::subscribers(MduId id) const
{
  require(id);
  return entries_[id.value].subscribers;
}

std::optional<MduId>
SessionHandler::find(const MduLabel& label) const
{
  const auto it = by_label_.find(label);
  if (it == by_label_.end())
    return std::nullopt;
  return it->second;
}

const MduLabel&
SessionHandler::label(MduId id) const
{
  require(id);
  return entries_[id.value].label;
}

const std::string&
SessionHandler::source(MduId id) const
{
  require(id);
  return entries_[id.value].source;
}

// ---------------------------------------------------------------------------
// PriorityPolicy

const char*
to_string(PriorityPolicy::Kind kind) noexcept
{
  switch (kind) {
    case PriorityPolicy::Kind::aoi_cost: return "aoi_cost";
    case PriorityPolicy::Kind::fifo: return "fifo";
    case PriorityPolicy::Kind::round_robin: return "round_robin";
  }
  return "?";
}

PriorityPolicy::Kind
parse_policy_kind(const std::string& text)
{
  if (text == "aoi_cost" || text == "AOI_COST")
    return PriorityPolicy::Kind::aoi_cost;
  if (text == "fifo" || text == "FIFO")
    return PriorityPolicy::Kind::fifo;
  if (text == "round_robin" || text == "ROUND_ROBIN")
    return PriorityPolicy::Kind::round_robin;
  throw ConfigValueError{"unknown priority policy '" + text + "'"};
}

// ---------------------------------------------------------------------------
// DataHandler

DataHandler::DataHandler(const SessionHandler& session, DataHandlerOptions options)
  : session_{session}
  , options_{std::move(options)}
{}

DataHandler::BufferState&
DataHandler::state(MduId id)
{
  session_.require(id);
  if (buffers_.size() < session_.size())
    buffers_.resize(session_.size());
  return buffers_[id.value];
}

const DataHandler::BufferState&
DataHandler::state(MduId id) const
{
  static const BufferState empty{};
  session_.require(id);
  return id.value < buffers_.size() ? buffers_[id.value] : empty;
}

void
DataHandler::ingest(Mdu mdu)
{
  auto& s = state(mdu.id);
  if (s.main) {
    ++discards_;
    if (s.main->gen_time > mdu.gen_time)
      return;
  }
  if (s.suppressed && s.suppressed->gen_time <= mdu.gen_time)
    s.suppressed.reset();
  s.main = std::move(mdu);
}

void
DataHandler::ingest_suppressed(Mdu mdu)
{
  auto& s = state(mdu.id);
  if (!options_.tis_enabled)
    return;
  if (s.main && s.main->gen_time >= mdu.gen_time)
    return;
  if (s.suppressed && s.suppressed->gen_time > mdu.gen_time)
    return;
  s.suppressed = std::move(mdu);
}

void
DataHandler::ingest_compound(Bytes packet)
{
  compound_.push_back(std::move(packet));
  while (compound_.size() > std::max<std::size_t>(options_.compound_fifo_max, 1)) {
    compound_.pop_front();
    ++compound_drops_;
  }
}

std::optional<Bytes>
DataHandler::pop_compound()
{
  if (compound_.empty())
    return std::nullopt;
  Bytes front = std::move(compound_.front());
  compound_.pop_front();
  return front;
}

std::uint64_t
DataHandler::rx_aoi_estimate(MduId id, Slot now) const
{
  const auto last = state(id).last_acked_gen;
  const auto diff = static_cast<std::int64_t>(now) - last;
  return diff > 0 ? static_cast<std::uint64_t>(diff) : 0;
}

double
DataHandler::rank(MduId id, const Mdu& m, Slot now) const
{
  const auto& policy = options_.policy;
  switch (policy.kind) {
    case PriorityPolicy::Kind::aoi_cost: {
      if (id.value >= policy.params.size())
        throw ConfigError{"aoi_cost policy has no plant parameters for MDU " + id_text(id)};
      const auto& p = policy.params[id.value];
      return aoi_cost(p.a, p.sigma_w2, rx_aoi_estimate(id, now));
    }
    case PriorityPolicy::Kind::fifo:
      return now >= m.gen_time ? static_cast<double>(now - m.gen_time) : 0.0;
    case PriorityPolicy::Kind::round_robin: {
      const auto n = session_.size();
      const auto distance = (id.value + n - rr_next_ % n) % n;
      return static_cast<double>(n - distance);
    }
  }
  return 0.0;
}

double
DataHandler::priority(MduId id, Slot now) const
{
  const auto& s = state(id);
  if (!s.main)
    return -std::numeric_limits<double>::infinity();
  if (s.pulled)
    return std::numeric_limits<double>::infinity();
  return rank(id, *s.main, now);
}

Selection
DataHandler::select(std::size_t capacity_bytes, Slot now)
{
  if (buffers_.size() < session_.size())
    buffers_.resize(session_.size());

  if (options_.stale_drop_slots > 0) {
    auto too_old = [&](const std::optional<Mdu>& m) {
      return m && now > m->gen_time && now - m->gen_time > options_.stale_drop_slots;
    };
    for (auto& s : buffers_) {
      if (too_old(s.main)) {
        s.main.reset();
        ++stale_drops_;
      }
      if (too_old(s.suppressed)) {
        s.suppressed.reset();
        ++stale_drops_;
      }
    }
  }

  struct Candidate
  {
    double priority;
    std::uint16_t id;
  };
  auto by_rank = [](const Candidate& l, const Candidate& r) {
    return l.priority != r.priority ? l.priority > r.priority : l.id < r.id;
  };

  Selection out;
  std::size_t used = kPduHeaderSize;
  std::vector<bool> taken(buffers_.size(), false);
  auto fill = [&](std::vector<Candidate>& cands, bool from_suppressed) {
    std::sort(cands.begin(), cands.end(), by_rank);
    for (const auto& c : cands) {
      if (out.mdus.size() == kMaxPduEntries)
        break;
      auto& s = buffers_[c.id];
      auto& slot = from_suppressed ? s.suppressed : s.main;
      const auto size = entry_wire_size(slot->payload.size());
      if (used + size > capacity_bytes)
        continue;
      used += size;
      taken[c.id] = true;
      s.pulled = false;
      out.mdus.push_back(std::move(*slot));
      slot.reset();
      if (!from_suppressed && s.suppressed && s.suppressed->gen_time <= out.mdus.back().gen_time)
        s.suppressed.reset();
      if (from_suppressed)
        ++out.tis_count;
    }
  };

  std::vector<Candidate> cands;
  cands.reserve(buffers_.size());
  for (std::size_t i = 0; i < buffers_.size(); ++i) {
    if (buffers_[i].main) {
      const MduId id{static_cast<std::uint16_t>(i)};
      cands.push_back({priority(id, now), id.value});
    }
  }
  fill(cands, false);

  const bool all_main_taken =
    std::none_of(buffers_.begin(), buffers_.end(), [](const BufferState& s) { return s.main.has_value(); });
  if (options_.tis_enabled && all_main_taken) {
    cands.clear();
    for (std::size_t i = 0; i < buffers_.size(); ++i) {
      if (buffers_[i].suppressed && !taken[i]) {
        const MduId id{static_cast<std::uint16_t>(i)};
        cands.push_back({rank(id, *buffers_[i].suppressed, now), id.value});
      }
    }
    fill(cands, true);
  }

  if (options_.policy.kind == PriorityPolicy::Kind::round_robin && !out.mdus.empty() && !buffers_.empty())
    rr_next_ = (static_cast<std::size_t>(out.mdus.back().id.value) + 1) % buffers_.size();
  return out;
}

void
DataHandler::handle_ack(const AckMessage& ack, Slot now)
{
  auto& s = state(ack.id);
  if (ack.gen_time > now)
    return;
  s.last_acked_gen = std::max<std::int64_t>(s.last_acked_gen, ack.gen_time);
}

void
DataHandler::handle_pull(const PullRequest& pull)
{
  state(pull.id).pulled = true;
}

const Mdu*
DataHandler::buffered(MduId id) const
{
  const auto& s = state(id);
  return s.main ? &*s.main : nullptr;
}

const Mdu*
DataHandler::buffered_suppressed(MduId id) const
{
  const auto& s = state(id);
  return s.suppressed ? &*s.suppressed : nullptr;
}

// ---------------------------------------------------------------------------
// DataWriter / DataReader

SalPdu
dw_compose(std::vector<Mdu> selection, std::size_t capacity_bytes)
{
  SalPdu pdu{std::move(selection), 0};
  if (pdu.entries.size() > kMaxPduEntries)
    throw CapacityError{"selection exceeds 255 entries"};
  const auto size = pdu_content_size(pdu);
  if (size > capacity_bytes)
    throw CapacityError{"selection needs " + std::to_string(size) + " bytes, capacity is " +
                        std::to_string(capacity_bytes)};
  pdu.padding_bytes = capacity_bytes - size;
  return pdu;
}

ReaderOutput
DataReader::process(const SalPdu& pdu, Slot /*now*/)
{
  ReaderOutput out;
  out.acks.reserve(pdu.entries.size());
  for (const auto& m : pdu.entries) {
    out.acks.push_back(AckMessage{m.id, m.gen_time});
    if (!session_.registered(m.id) || session_.subscribers(m.id).empty()) {
      ++unsubscribed_drops_;
      continue;
    }
    out.deliveries.push_back(Delivery{m, session_.subscribers(m.id)});
  }
  return out;
}

PullRequest
DataReader::pull(MduId id) const
{
  session_.require(id);
  return PullRequest{id};
}

} // namespace salsim
