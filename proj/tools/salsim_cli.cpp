// Command line front end: run, sweep, plot.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "salsim/metrics_io.hpp"

using namespace salsim;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

std::vector<std::string>
split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream ss{s};
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty())
      out.push_back(item);
  }
  return out;
}

void
print_summary(const std::vector<SummaryRow>& rows)
{
  std::printf("%4s %-7s %5s %14s %14s %14s %9s %9s\n", "N", "strategy", "runs", "mean_aoi", "mean_lqg", "lqg_max",
              "padding", "trigger");
  for (const auto& s : rows)
    std::printf("%4zu %-7s %5zu %14.6g %14.6g %14.6g %9.4f %9.4f\n", s.n_loops, to_string(s.strategy).c_str(),
                s.runs, s.aoi.mean, s.lqg.mean, s.lqg.max, s.padding.mean, s.trigger.mean);
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"Slotted simulator of networked control loops behind a semantic aggregation layer"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;

  auto* run_cmd = app.add_subcommand("run", "Simulate one configuration with one seed");
  run_cmd->add_option("--config", config_path, "key=value configuration file")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the configured seed");
  run_cmd->add_option("--out", out_path, "Write a one-row CSV");

  std::string n_list = "5,10,15,20";
  std::string strategy_list = "UC,FC,UA,FA";
  bool tis = false;
  unsigned jobs = 1;
  std::size_t repetitions = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every (N, strategy) pair over repeated seeds");
  sweep_cmd->add_option("--config", config_path, "key=value configuration file")->required();
  sweep_cmd->add_option("--n", n_list, "Comma separated loop counts")->capture_default_str();
  sweep_cmd->add_option("--strategies", strategy_list, "Comma separated UC,FC,UA,FA,FA+TIS")->capture_default_str();
  sweep_cmd->add_flag("--tis", tis, "Also run FA with transmit-if-space (FA+TIS)");
  sweep_cmd->add_option("--repetitions", repetitions, "Override the configured repetitions");
  sweep_cmd->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  sweep_cmd->add_option("--out", out_path, "CSV output")->required();

  std::string in_path;
  std::string metric = "aoi";
  auto* plot_cmd = app.add_subcommand("plot", "Render a sweep CSV as SVG");
  plot_cmd->add_option("--in", in_path, "Sweep CSV")->required();
  plot_cmd->add_option("--metric", metric, "aoi or lqg")->check(CLI::IsMember({"aoi", "lqg"}))->capture_default_str();
  plot_cmd->add_option("--out", out_path, "SVG output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run_cmd) {
      auto config = load_config(config_path);
      if (*seed_opt)
        config.seed = seed;
      const auto result = run(config);
      std::printf("N=%zu strategy=%s seed=%llu mean_aoi=%s mean_lqg=%s padding=%s trigger=%s discards=%llu\n",
                  result.n_loops, to_string(result.strategy).c_str(), static_cast<unsigned long long>(result.seed),
                  format_number(result.mean_aoi).c_str(), format_number(result.mean_lqg).c_str(),
                  format_number(result.padding_fraction).c_str(), format_number(result.trigger_rate).c_str(),
                  static_cast<unsigned long long>(result.discards));
      if (!out_path.empty())
        write_csv(SweepTable{{to_row(result)}}, out_path);
    } else if (*sweep_cmd) {
      const auto config = load_config(config_path);
      std::vector<std::size_t> ns;
      for (const auto& s : split_list(n_list)) {
        try {
          ns.push_back(std::stoul(s));
        } catch (const std::exception&) {
          throw ConfigValueError{"--n: not a loop count: '" + s + "'"};
        }
      }
      std::vector<Strategy> strategies;
      for (const auto& s : split_list(strategy_list))
        strategies.push_back(parse_strategy(s));
      const Strategy fa_tis{StrategyKind::FA, true};
      if (tis && std::find(strategies.begin(), strategies.end(), fa_tis) == strategies.end())
        strategies.push_back(fa_tis);
      const auto table = sweep(config, ns, strategies, repetitions ? repetitions : config.repetitions, jobs);
      write_csv(table, out_path);
      print_summary(summarize(table));
    } else if (*plot_cmd) {
      render_plot(in_path, PlotSpec{parse_plot_metric(metric)}, out_path);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
