// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <sys/wait.h>

#include "salsim/metrics_io.hpp"
#include "scenarios.hpp"

using namespace salsim;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void
report(int id, bool ok, const std::string& what)
{
  std::printf("%s [%d] %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok)
    ++failures;
}

void
detail(const char* fmt, auto... args)
{
  std::printf("       ");
  std::printf(fmt, args...);
  std::printf("\n");
}

// ---------------------------------------------------------------------------

const std::vector<std::size_t> kNs{5, 10, 15, 20};

std::map<std::pair<std::size_t, std::string>, SummaryRow>
strategy_sweep(double& seconds)
{
  const SimConfig base; // p = 0.10, deadband 0.5, 64-byte blocks, 1e5 slots
  const std::vector<Strategy> ss{Strategy{StrategyKind::UC}, Strategy{StrategyKind::FC},
                                 Strategy{StrategyKind::UA}, Strategy{StrategyKind::FA},
                                 Strategy{StrategyKind::FA, true}};
  const auto start = std::chrono::steady_clock::now();
  const auto table = sweep(base, kNs, ss, base.repetitions, 1);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::map<std::pair<std::size_t, std::string>, SummaryRow> out;
  for (const auto& s : summarize(table))
    out[{s.n_loops, to_string(s.strategy)}] = s;
  return out;
}

void
criteria_1_and_2()
{
  double seconds = 0.0;
  const auto sum = strategy_sweep(seconds);
  auto at = [&](std::size_t n, const char* s) -> const SummaryRow& { return sum.at({n, s}); };

  detail("%4s %-7s %12s %14s %10s", "N", "strategy", "mean_aoi", "mean_lqg", "padding");
  for (auto n : kNs)
    for (const char* s : {"UA", "FA", "FA+TIS", "FC", "UC"})
      detail("%4zu %-7s %12.5g %14.6g %10.4f", n, s, at(n, s).aoi.mean, at(n, s).lqg.mean, at(n, s).padding.mean);

  bool lqg_order = true, aoi_order = true;
  for (auto n : kNs) {
    const char* order[] = {"UA", "FA", "FC", "UC"};
    for (int k = 0; k < 3; ++k) {
      const bool lqg_ok = at(n, order[k]).lqg.mean < at(n, order[k + 1]).lqg.mean;
      const bool aoi_ok = at(n, order[k]).aoi.mean < at(n, order[k + 1]).aoi.mean;
      if (!lqg_ok)
        detail("N=%zu: LQG %s < %s violated", n, order[k], order[k + 1]);
      if (!aoi_ok)
        detail("N=%zu: AoI %s < %s violated", n, order[k], order[k + 1]);
      lqg_order = lqg_order && lqg_ok;
      aoi_order = aoi_order && aoi_ok;
    }
  }
  const double uc_over_fc = at(20, "UC").lqg.mean / at(20, "FC").lqg.mean;
  detail("UC/FC LQG at N=20: %.4g, sweep wall time %.1f s (single thread, 400 runs)", uc_over_fc, seconds);
  report(1, lqg_order && aoi_order && uc_over_fc >= 1.5 && seconds < 300.0,
         "strategy ordering UA < FA < FC < UC in LQG and AoI for N in {5,10,15,20}, UC >= 1.5x FC at N=20, "
         "sweep < 5 min");

  bool tis_ok = true;
  for (auto n : kNs) {
    const auto& fa = at(n, "FA");
    const auto& tis = at(n, "FA+TIS");
    const bool ok = tis.aoi.mean <= fa.aoi.mean && tis.padding.mean <= fa.padding.mean;
    if (!ok)
      detail("N=%zu: FA+TIS aoi %.6g pad %.6g vs FA aoi %.6g pad %.6g", n, tis.aoi.mean, tis.padding.mean,
             fa.aoi.mean, fa.padding.mean);
    tis_ok = tis_ok && ok;
  }
  report(2, tis_ok, "FA+TIS has mean AoI and padding no worse than FA at every N");
}

void
criterion_3()
{
  const auto sol = solve_riccati_scalar(PlantParams{1, 1, 1, 1, 1});
  const double err = std::abs(sol.P - (1.0 + std::sqrt(5.0)) / 2.0);
  detail("P=%.15g, |P - golden ratio| = %.3g", sol.P, err);
  report(3, err <= 1e-9, "Riccati solution for a=b=q=r=1 within 1e-9 of (1+sqrt 5)/2");
}

void
criterion_4()
{
  SimConfig c;
  c.n_loops = 1;
  c.strategy = Strategy{StrategyKind::UA};
  c.link.loss_prob = 0.0;
  c.horizon = 100'000;
  const auto r = run(c);
  const auto p = c.plant_params()[0];
  const double target = p.sigma_w2 * solve_riccati_scalar(p).P;
  const double rel = std::abs(r.mean_lqg - target) / target;
  detail("mean stage cost %.6g, sigma^2 P = %.6g, relative gap %.3g", r.mean_lqg, target, rel);
  report(4, rel < 0.05, "lossless single loop: mean stage cost within 5% of sigma^2 P");
}

void
criterion_5()
{
  const std::vector<bool> lost{true, false, true, true, false};
  const auto r = scenarios::forced_erasures(lost);
  std::vector<std::uint64_t> aoi;
  for (const auto& s : r.traces)
    aoi.push_back(s.aoi.at(0));
  detail("AoI trace [%llu,%llu,%llu,%llu,%llu]", (unsigned long long)aoi[0], (unsigned long long)aoi[1],
         (unsigned long long)aoi[2], (unsigned long long)aoi[3], (unsigned long long)aoi[4]);
  report(5, aoi == std::vector<std::uint64_t>{1, 0, 1, 2, 0}, "erasures [lost,ok,lost,lost,ok] give AoI [1,0,1,2,0]");
}

void
criterion_6()
{
  constexpr unsigned T = 8;
  constexpr double p = 0.3;
  constexpr std::size_t runs = 100'000;
  const auto exact = scenarios::exact_mean_aoi(T, p);

  SimConfig c;
  c.n_loops = 1;
  c.horizon = T;
  c.warmup = 0;
  c.strategy = Strategy{StrategyKind::UA};
  c.link.loss_prob = p;
  double sum = 0.0;
  for (std::size_t i = 0; i < runs; ++i) {
    c.seed = 1 + i;
    sum += run(c).mean_aoi;
  }
  const double mc = sum / runs;
  const double se = std::sqrt(exact.variance / runs);
  detail("exact %.6f, Monte Carlo %.6f, SE %.3g, |diff|/SE %.2f", exact.mean, mc, se, std::abs(mc - exact.mean) / se);
  report(6, std::abs(mc - exact.mean) <= 3.0 * se, "N=1, T=8, p=0.3: Monte Carlo mean AoI within 3 SE of enumeration");
}

void
criterion_7()
{
  const auto s = scenarios::deadband_flaw();
  const auto& tr = s.result.traces;
  const double held = tr.at(s.jump_slot).x.at(0);
  bool ok = tr.at(s.jump_slot).admitted.at(0) && tr.at(s.jump_slot).erased;
  std::size_t retriggers = 0;
  bool inside = true;
  for (auto t = s.jump_slot + 1; t < s.exit_slot; ++t) {
    retriggers += tr[t].admitted.at(0) ? 1 : 0;
    inside = inside && std::abs(tr[t].x.at(0) - held) <= 0.5;
  }
  const bool exits = tr.at(s.exit_slot).admitted.at(0);
  const auto stale = tr.at(s.exit_slot - 1).aoi.at(0);
  detail("re-triggers inside the band: %zu, receiver AoI before exit: %llu, trigger on exit: %s", retriggers,
         (unsigned long long)stale, exits ? "yes" : "no");
  ok = ok && inside && retriggers == 0 && exits && stale >= s.exit_slot - 1 - s.jump_slot;
  report(7, ok, "deadband filter does not re-trigger an erased sample until the state leaves the band");
}

std::string
slurp(const fs::path& p)
{
  std::ifstream f{p, std::ios::binary};
  return std::string{std::istreambuf_iterator<char>{f}, {}};
}

bool
cli_ok(const std::string& args)
{
  const std::string cmd = std::string{SALSIM_CLI_PATH} + " " + args + " >/dev/null";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) && WEXITSTATUS(st) == 0;
}

void
criterion_8()
{
  const auto dir = fs::temp_directory_path() / "salsim_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto cfg = (dir / "small.cfg").string();
  std::ofstream{cfg} << "horizon = 5000\nwarmup = 500\nrepetitions = 3\nseed = 42\n";

  bool ok = true;
  for (int k : {1, 2}) {
    const auto base = (dir / ("run" + std::to_string(k))).string();
    ok = ok && cli_ok("sweep --config " + cfg + " --n 2,4 --strategies UC,FC,UA,FA --tis --out " + base + ".csv");
    ok = ok && cli_ok("plot --in " + base + ".csv --metric aoi --out " + base + "_aoi.svg");
    ok = ok && cli_ok("plot --in " + base + ".csv --metric lqg --out " + base + "_lqg.svg");
  }
  bool same = ok;
  for (const char* suffix : {".csv", "_aoi.svg", "_lqg.svg"}) {
    const auto a = slurp(dir / (std::string{"run1"} + suffix));
    const auto b = slurp(dir / (std::string{"run2"} + suffix));
    same = same && !a.empty() && a == b;
  }
  fs::remove_all(dir);
  report(8, ok && same, "identical config and seed give byte-identical CSV and SVG");
}

void
criterion_9()
{
  std::mt19937_64 rng{20240601};
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 10'000; ++trial) {
    SalPdu pdu;
    const auto count = std::uniform_int_distribution<int>{0, 12}(rng);
    std::vector<std::uint16_t> ids(64);
    for (std::size_t i = 0; i < ids.size(); ++i)
      ids[i] = static_cast<std::uint16_t>(rng());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::shuffle(ids.begin(), ids.end(), rng);
    for (int e = 0; e < count; ++e) {
      Mdu m{MduId{ids[static_cast<std::size_t>(e)]}, static_cast<Slot>(rng()), {}};
      m.payload.resize(std::uniform_int_distribution<std::size_t>{0, 40}(rng));
      for (auto& b : m.payload)
        b = static_cast<Byte>(rng());
      pdu.entries.push_back(std::move(m));
    }
    pdu.padding_bytes = std::uniform_int_distribution<std::size_t>{0, 30}(rng);
    const auto bytes = serialize_pdu(pdu);
    if (bytes.size() != pdu_wire_size(pdu) || !(deserialize_pdu(bytes) == pdu))
      ++mismatches;
  }

  Bytes packet(150);
  for (auto& b : packet)
    b = static_cast<Byte>(rng());
  const auto blocks = fragment(packet, 64, 1);
  ErasureChannel ch{0.1, 7};
  Reassembler rx;
  constexpr int trials = 100'000;
  int delivered = 0;
  for (int t = 0; t < trials; ++t) {
    std::optional<Bytes> got;
    for (const auto& b : blocks)
      if (ch.transmit(b) == TxOutcome::delivered)
        got = rx.push(b.bytes);
    delivered += got && *got == packet ? 1 : 0;
  }
  const double rate = static_cast<double>(delivered) / trials;
  detail("PDU roundtrip mismatches: %zu / 10000; %zu fragments, delivery rate %.4f", mismatches, blocks.size(), rate);
  report(9, mismatches == 0 && blocks.size() == 3 && std::abs(rate - 0.729) <= 0.005,
         "10^4 PDU roundtrips exact; 3-fragment delivery at p=0.1 is 0.729 +- 0.005");
}

void
guarded(const std::function<void()>& f, std::initializer_list<int> ids)
{
  try {
    f();
  } catch (const std::exception& e) {
    for (int id : ids)
      report(id, false, std::string{"threw: "} + e.what());
  }
}

} // namespace

int
main()
{
  guarded(criteria_1_and_2, {1, 2});
  guarded(criterion_3, {3});
  guarded(criterion_4, {4});
  guarded(criterion_5, {5});
  guarded(criterion_6, {6});
  guarded(criterion_7, {7});
  guarded(criterion_8, {8});
  guarded(criterion_9, {9});
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
