#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "salsim/engine.hpp"

namespace salsim {

/// Fixed CSV header; one row per run follows.
inline constexpr std::string_view kCsvHeader =
  "N,strategy,seed,mean_aoi,mean_lqg,padding_fraction,trigger_rate,discards";

/// Nine significant digits, shortest of %e / %f style.
std::string format_number(double v);

/// '\n'-terminated CSV text. Throws Error for an empty table.
std::string to_csv(const SweepTable& table);
/// Throws IoError on failure to write.
void write_csv(const SweepTable& table, const std::filesystem::path& path);

/// Throws ParseError on anything but the format written by to_csv.
SweepTable parse_csv(std::string_view text);
/// Throws IoError / ParseError.
SweepTable read_csv(const std::filesystem::path& path);

enum class PlotMetric
{
  aoi,
  lqg
};

PlotMetric parse_plot_metric(const std::string& text);

struct PlotSpec
{
  PlotMetric metric = PlotMetric::aoi;
  int width = 640;
  int height = 420;
};

/// Standalone SVG: per strategy, a polyline through the per-N mean of run
/// means and a semi-transparent band between the per-N min and max. The y
/// axis switches to log scale when positive data span more than three
/// decades. Throws ParseError with fewer than two distinct N values.
std::string render_svg(const SweepTable& table, const PlotSpec& spec);

/// Reads a sweep CSV and writes the SVG. Throws IoError / ParseError.
void render_plot(const std::filesystem::path& csv_path, const PlotSpec& spec,
                 const std::filesystem::path& out_path);

/// Flat `key = value` text, one per line; blank lines and lines starting with
/// '#' are ignored. Recognised keys:
///
///   n_loops horizon warmup strategy tis policy seed repetitions
///   loss_prob loss_model tb_capacity payload_size compound_fifo_max stale_drop
///   deadband plant.a_min plant.a_max plant.b sigma_w2 q r
///
/// Missing keys keep their defaults. Throws ConfigKeyError for unknown or
/// repeated keys and ConfigValueError for values that do not parse or
/// describe an invalid configuration.
SimConfig parse_config(std::string_view text);
/// Throws IoError when the file cannot be read, otherwise as parse_config.
SimConfig load_config(const std::filesystem::path& path);

} // namespace salsim
