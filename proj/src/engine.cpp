#include "salsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace salsim {

void
SimConfig::validate() const
{
  if (n_loops < 1)
    throw ConfigValueError{"n_loops must be >= 1"};
  if (n_loops > 0xFFFF)
    throw ConfigValueError{"n_loops exceeds the MDU id space"};
  if (horizon < 1)
    throw ConfigValueError{"horizon must be >= 1"};
  if (horizon > std::numeric_limits<Slot>::max())
    throw ConfigValueError{"horizon exceeds the 32-bit slot counter"};
  if (warmup >= horizon)
    throw ConfigValueError{"warmup must be shorter than the horizon"};
  if (repetitions < 1)
    throw ConfigValueError{"repetitions must be >= 1"};
  if (payload_size < 8 || payload_size > 0xFFFF)
    throw ConfigValueError{"payload_size must lie in [8, 65535]"};
  if (!(deadband >= 0.0))
    throw ConfigValueError{"deadband must be >= 0"};
  if (compound_fifo_max < 1)
    throw ConfigValueError{"compound_fifo_max must be >= 1"};
  if (!plants.empty() && plants.size() != n_loops)
    throw ConfigValueError{"explicit plant list must hold n_loops entries"};
  strategy.validate();
  link.validate(payload_size);
  if (strategy.compound() && link.tb_capacity <= kFragmentHeaderSize)
    throw ConfigValueError{"tb_capacity too small for fragmentation"};
  for (const auto& p : plant_params())
    p.validate();
}

std::vector<PlantParams>
SimConfig::plant_params() const
{
  if (!plants.empty())
    return plants;
  std::vector<PlantParams> out(n_loops);
  for (std::size_t i = 0; i < n_loops; ++i) {
    const double t = n_loops == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n_loops - 1);
    out[i] = PlantParams{plant.a_min + t * (plant.a_max - plant.a_min), plant.b, plant.sigma_w2, plant.q,
                         plant.r};
  }
  return out;
}

namespace {

std::uint64_t
stream_seed(std::uint64_t seed, std::uint32_t stream)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (std::uint64_t{out[0]} << 32) | out[1];
}

/// Receiver-side view of one loop: the controller plus its AoI bookkeeping.
struct LoopState
{
  PlantLoop plant;
  std::int64_t last_gen = -1;
  double aoi_sum = 0.0;
  double cost_sum = 0.0;
  std::optional<std::pair<double, Slot>> arrival;
};

} // namespace

RunResult
run(const SimConfig& config, const RunHooks& hooks)
{
  config.validate();
  const auto n = config.n_loops;
  const auto params = config.plant_params();
  const auto cap = config.link.tb_capacity;

  SessionHandler session;
  std::vector<MduId> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = session.register_label(MduLabel{"loop/" + std::to_string(i) + "/x"}, "publisher");
    session.subscribe(id, Endpoint{static_cast<std::uint32_t>(i)});
    ids.push_back(id);
  }

  DataHandlerOptions dh_opts;
  dh_opts.policy.kind = config.policy;
  for (const auto& p : params)
    dh_opts.policy.params.push_back({p.a, p.sigma_w2});
  dh_opts.tis_enabled = config.strategy.tis;
  dh_opts.compound_fifo_max = config.compound_fifo_max;
  dh_opts.stale_drop_slots = config.stale_drop_slots;
  DataHandler dh{session, dh_opts};
  DataReader dr{session};
  Publisher publisher{ids, config.strategy, config.deadband, config.payload_size};
  Reassembler reassembler;

  std::vector<LoopState> loops;
  loops.reserve(n);
  std::vector<double> noise_scale;
  for (const auto& p : params) {
    loops.push_back(LoopState{PlantLoop{p, static_cast<std::size_t>(config.horizon)}, -1, 0.0, 0.0, {}});
    noise_scale.push_back(std::sqrt(p.sigma_w2));
  }

  std::mt19937_64 noise_rng{stream_seed(config.seed, 1)};
  std::normal_distribution<double> gauss{0.0, 1.0};
  ErasureChannel channel{config.link.loss_prob, stream_seed(config.seed, 2)};

  RunResult res;
  res.n_loops = n;
  res.strategy = config.strategy;
  res.seed = config.seed;
  if (hooks.record_traces)
    res.traces.reserve(static_cast<std::size_t>(config.horizon));

  std::vector<double> samples(n);
  std::vector<TransportBlock> in_flight;
  std::size_t in_flight_next = 0;
  bool packet_erased = false;
  std::uint16_t packet_id = 0;
  double padding_sum = 0.0;
  std::uint64_t admitted_sum = 0;

  for (std::uint64_t t = 0; t < config.horizon; ++t) {
    const auto now = static_cast<Slot>(t);
    const bool measured = t >= config.warmup;
    SlotTrace trace;

    // (1) plants
    for (std::size_t i = 0; i < n; ++i) {
      double w = noise_scale[i] * gauss(noise_rng);
      if (hooks.noise) {
        if (auto forced = hooks.noise(t, i))
          w = *forced;
      }
      loops[i].plant.step(w);
      samples[i] = loops[i].plant.x();
    }

    // (2) publisher, (3) ingest
    auto published = publisher.publish(samples, now);
    if (measured)
      admitted_sum += published.admitted;
    if (hooks.record_traces)
      trace.admitted = published.admitted_mask;
    res.published_mdus += published.atomic.size() + published.suppressed.size();
    for (auto& m : published.atomic)
      dh.ingest(std::move(m));
    for (auto& m : published.suppressed)
      dh.ingest_suppressed(std::move(m));
    if (published.compound) {
      res.published_mdus += published.admitted;
      dh.ingest_compound(std::move(*published.compound));
    }

    // (4) fill one transport block
    std::optional<TransportBlock> tb;
    bool first_fragment = false;
    std::size_t padding = cap;
    if (config.strategy.compound()) {
      if (in_flight_next == in_flight.size()) {
        in_flight.clear();
        in_flight_next = 0;
        if (auto packet = dh.pop_compound()) {
          in_flight = fragment(*packet, cap, packet_id++);
          first_fragment = true;
        }
      }
      if (in_flight_next < in_flight.size()) {
        tb = std::move(in_flight[in_flight_next++]);
        padding = cap - tb->bytes.size();
      }
    } else {
      auto selection = dh.select(cap, now);
      res.tis_filled += selection.tis_count;
      auto pdu = dw_compose(std::move(selection.mdus), cap);
      padding = pdu.padding_bytes;
      tb = TransportBlock{serialize_pdu(pdu), std::nullopt};
    }

    // (5) channel: one draw per slot, always
    bool erased = channel.next_erasure();
    if (hooks.erasure) {
      if (auto forced = hooks.erasure(t))
        erased = *forced;
    }
    if (config.strategy.compound() && config.link.loss_model == LossModel::per_packet && tb) {
      if (first_fragment)
        packet_erased = erased;
      erased = packet_erased;
    }

    // (6) receiving SAL
    if (tb && !erased) {
      if (config.strategy.compound()) {
        if (auto packet = reassembler.push(tb->bytes)) {
          const auto decoded = decode_compound(*packet);
          for (const auto& [loop, payload] : decoded.entries) {
            const MduId id = ids.at(loop);
            if (!session.registered(id) || session.subscribers(id).empty()) {
              ++res.unsubscribed_drops;
              continue;
            }
            for (const auto& sub : session.subscribers(id))
              loops[sub.value].arrival = {decode_value(payload, config.payload_size), decoded.gen_time};
          }
        }
      } else {
        const auto out = dr.process(deserialize_pdu(tb->bytes), now);
        for (const auto& ack : out.acks)
          dh.handle_ack(ack, now);
        for (const auto& d : out.deliveries) {
          for (const auto& sub : d.subscribers)
            loops[sub.value].arrival = {decode_value(d.mdu.payload, config.payload_size), d.mdu.gen_time};
        }
      }
    }

    // (7) controllers, (8) metrics
    for (std::size_t i = 0; i < n; ++i) {
      auto& L = loops[i];
      if (L.arrival && static_cast<std::int64_t>(L.arrival->second) > L.last_gen) {
        L.plant.estimate_delivery(L.arrival->first, L.arrival->second, t);
        L.last_gen = L.arrival->second;
        ++res.delivered_mdus;
        if (hooks.record_traces)
          trace.delivered.emplace_back(i, L.arrival->second);
      } else {
        L.plant.estimate_no_delivery();
      }
      L.arrival.reset();
      const double u = L.plant.control(t);
      const auto aoi = static_cast<std::uint64_t>(static_cast<std::int64_t>(t) - L.last_gen);
      if (measured) {
        L.aoi_sum += static_cast<double>(aoi);
        L.cost_sum += stage_cost(L.plant.x(), u, L.plant.params().q, L.plant.params().r);
      }
      if (hooks.record_traces) {
        trace.aoi.push_back(aoi);
        trace.x.push_back(L.plant.x());
        trace.x_hat.push_back(L.plant.x_hat());
      }
    }

    if (measured)
      padding_sum += static_cast<double>(padding) / static_cast<double>(cap);
    if (hooks.record_traces) {
      trace.transmitted = tb.has_value();
      trace.erased = erased;
      trace.padding_bytes = padding;
      res.traces.push_back(std::move(trace));
    }
  }

  const auto slots = static_cast<double>(config.horizon - config.warmup);
  double aoi_total = 0.0;
  double cost_total = 0.0;
  for (const auto& L : loops) {
    res.loop_aoi.push_back(L.aoi_sum / slots);
    res.loop_lqg.push_back(L.cost_sum / slots);
    aoi_total += res.loop_aoi.back();
    cost_total += res.loop_lqg.back();
  }
  res.mean_aoi = aoi_total / static_cast<double>(n);
  res.mean_lqg = cost_total / static_cast<double>(n);
  res.padding_fraction = padding_sum / slots;
  res.trigger_rate = static_cast<double>(admitted_sum) / (slots * static_cast<double>(n));
  res.discards = dh.discards() + dh.compound_drops();
  res.unsubscribed_drops += dr.unsubscribed_drops();
  res.erasure_draws = channel.draws();
  return res;
}

SweepRow
to_row(const RunResult& r)
{
  return {r.n_loops, r.strategy, r.seed, r.mean_aoi, r.mean_lqg, r.padding_fraction, r.trigger_rate, r.discards};
}

std::vector<SummaryRow>
summarize(const SweepTable& table)
{
  std::vector<SummaryRow> out;
  auto extend = [](Band& b, double v, std::size_t k) {
    if (k == 0) {
      b = {v, v, v};
      return;
    }
    b.mean += v;
    b.min = std::min(b.min, v);
    b.max = std::max(b.max, v);
  };
  for (const auto& row : table.rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
      return s.n_loops == row.n_loops && s.strategy == row.strategy;
    });
    if (it == out.end()) {
      out.push_back(SummaryRow{row.n_loops, row.strategy, 0, {}, {}, {}, {}});
      it = std::prev(out.end());
    }
    extend(it->aoi, row.mean_aoi, it->runs);
    extend(it->lqg, row.mean_lqg, it->runs);
    extend(it->padding, row.padding_fraction, it->runs);
    extend(it->trigger, row.trigger_rate, it->runs);
    ++it->runs;
  }
  for (auto& s : out) {
    const auto k = static_cast<double>(s.runs);
    s.aoi.mean /= k;
    s.lqg.mean /= k;
    s.padding.mean /= k;
    s.trigger.mean /= k;
  }
  return out;
}

SweepTable
sweep(const SimConfig& base, const std::vector<std::size_t>& n_values, const std::vector<Strategy>& strategies,
      std::size_t repetitions, unsigned jobs)
{
  if (n_values.empty() || strategies.empty())
    throw ConfigValueError{"sweep needs at least one N and one strategy"};
  if (repetitions < 1)
    throw ConfigValueError{"repetitions must be >= 1"};

  std::vector<SimConfig> configs;
  for (auto n : n_values) {
    for (const auto& s : strategies) {
      for (std::size_t i = 0; i < repetitions; ++i) {
        SimConfig c = base;
        c.n_loops = n;
        c.strategy = s;
        c.seed = base.seed + i;
        if (!c.plants.empty() && c.plants.size() != n)
          c.plants.clear();
        c.validate();
        configs.push_back(std::move(c));
      }
    }
  }

  SweepTable table;
  table.rows.resize(configs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t k = next++; k < configs.size() && !failed; k = next++) {
      try {
        table.rows[k] = to_row(run(configs[k]));
      } catch (...) {
        if (!failed.exchange(true))
          failure = std::current_exception();
      }
    }
  };

  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j)
      pool.emplace_back(worker);
  }
  if (failure)
    std::rethrow_exception(failure);
  return table;
}

} // namespace salsim
