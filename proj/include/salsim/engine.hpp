#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "salsim/control.hpp"
#include "salsim/network.hpp"
#include "salsim/publisher.hpp"
#include "salsim/sal.hpp"

namespace salsim {

/// How per-loop plants are generated when no explicit list is given:
/// a_i linearly spaced over [a_min, a_max] (a_min alone for one loop).
struct PlantDefaults
{
  double a_min = 1.0;
  double a_max = 1.2;
  double b = 1.0;
  double sigma_w2 = 1.0;
  double q = 1.0;
  double r = 1.0;
};

struct SimConfig
{
  std::size_t n_loops = 5;
  std::uint64_t horizon = 100'000;
  /// Leading slots excluded from every mean.
  std::uint64_t warmup = 1'000;
  Strategy strategy;
  LinkConfig link;
  PlantDefaults plant;
  /// Overrides `plant` when non-empty; must then hold n_loops entries.
  std::vector<PlantParams> plants;
  double deadband = 0.5;
  PriorityPolicy::Kind policy = PriorityPolicy::Kind::aoi_cost;
  std::uint64_t seed = 1;
  std::size_t repetitions = 20;
  std::size_t payload_size = kDefaultPayloadSize;
  std::size_t compound_fifo_max = 8;
  std::uint32_t stale_drop_slots = 0;

  /// Throws ConfigError (or a subclass) when the configuration is unusable.
  void validate() const;
  std::vector<PlantParams> plant_params() const;
};

/// Per-slot record, kept only when requested.
struct SlotTrace
{
  std::vector<std::uint64_t> aoi;
  std::vector<double> x;
  std::vector<double> x_hat;
  std::vector<bool> admitted;
  /// (loop, gen_time) for every sample the controllers received this slot.
  std::vector<std::pair<std::size_t, Slot>> delivered;
  bool transmitted = false;
  bool erased = false;
  std::size_t padding_bytes = 0;
};

/// Test and experiment hooks. Draws are always consumed from the seeded
/// streams, so an override never shifts the random sequences.
struct RunHooks
{
  std::function<std::optional<bool>(std::uint64_t slot)> erasure;
  std::function<std::optional<double>(std::uint64_t slot, std::size_t loop)> noise;
  bool record_traces = false;
};

struct RunResult
{
  std::size_t n_loops = 0;
  Strategy strategy;
  std::uint64_t seed = 0;

  double mean_aoi = 0.0;
  double mean_lqg = 0.0;
  std::vector<double> loop_aoi;
  std::vector<double> loop_lqg;
  double padding_fraction = 0.0;
  double trigger_rate = 0.0;
  std::uint64_t discards = 0;

  std::uint64_t published_mdus = 0;
  std::uint64_t delivered_mdus = 0;
  std::uint64_t unsubscribed_drops = 0;
  std::uint64_t tis_filled = 0;
  std::uint64_t erasure_draws = 0;

  std::vector<SlotTrace> traces;
};

/// One deterministic simulation. In every slot: plants step, the publisher
/// samples, the transmitting SAL ingests and fills one transport block, the
/// channel decides, the receiving SAL decomposes and ACKs, controllers update
/// and act, metrics record.
RunResult run(const SimConfig& config, const RunHooks& hooks = {});

struct SweepRow
{
  std::size_t n_loops = 0;
  Strategy strategy;
  std::uint64_t seed = 0;
  double mean_aoi = 0.0;
  double mean_lqg = 0.0;
  double padding_fraction = 0.0;
  double trigger_rate = 0.0;
  std::uint64_t discards = 0;
};

SweepRow to_row(const RunResult& r);

struct Band
{
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct SummaryRow
{
  std::size_t n_loops = 0;
  Strategy strategy;
  std::size_t runs = 0;
  Band aoi;
  Band lqg;
  Band padding;
  Band trigger;
};

/// Rows ordered by N ascending, strategy in the given order, seed ascending.
struct SweepTable
{
  std::vector<SweepRow> rows;
};

/// Mean, min and max of the per-run means for each (N, strategy), in table order.
std::vector<SummaryRow> summarize(const SweepTable& table);

/// Runs `repetitions` seeds base.seed + i for each (N, strategy).
/// `jobs` > 1 runs independent simulations on worker threads; the table is
/// the same either way.
SweepTable sweep(const SimConfig& base, const std::vector<std::size_t>& n_values,
                 const std::vector<Strategy>& strategies, std::size_t repetitions, unsigned jobs = 1);

} // namespace salsim
