#include "salsim/metrics_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace salsim {

std::string
format_number(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV

std::string
to_csv(const SweepTable& table)
{
  if (table.rows.empty())
    throw Error{"refusing to write an empty result table"};
  std::string out{kCsvHeader};
  out += '\n';
  for (const auto& r : table.rows) {
    out += std::to_string(r.n_loops);
    out += ',';
    out += to_string(r.strategy);
    out += ',';
    out += std::to_string(r.seed);
    for (double v : {r.mean_aoi, r.mean_lqg, r.padding_fraction, r.trigger_rate}) {
      out += ',';
      out += format_number(v);
    }
    out += ',';
    out += std::to_string(r.discards);
    out += '\n';
  }
  return out;
}

namespace {

void
write_file(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream f{path, std::ios::binary | std::ios::trunc};
  if (!f)
    throw IoError{"cannot open " + path.string() + " for writing"};
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.close();
  if (!f)
    throw IoError{"failed writing " + path.string()};
}

std::string
read_file(const std::filesystem::path& path)
{
  std::ifstream f{path, std::ios::binary};
  if (!f)
    throw IoError{"cannot open " + path.string()};
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad())
    throw IoError{"failed reading " + path.string()};
  return ss.str();
}

std::string_view
trim(std::string_view s)
{
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view>
split(std::string_view s, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

template<typename T>
bool
parse_int(std::string_view s, T& out)
{
  s = trim(s);
  if (s.empty())
    return false;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool
parse_real(std::string_view s, double& out)
{
  s = trim(s);
  if (s.empty())
    return false;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(out);
}

} // namespace

void
write_csv(const SweepTable& table, const std::filesystem::path& path)
{
  write_file(path, to_csv(table));
}

SweepTable
parse_csv(std::string_view text)
{
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty())
    lines.pop_back();
  if (lines.empty() || trim(lines.front()) != kCsvHeader)
    throw ParseError{"CSV header does not match '" + std::string{kCsvHeader} + "'"};

  SweepTable table;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto where = "CSV line " + std::to_string(k + 1);
    const auto f = split(trim(lines[k]), ',');
    if (f.size() != 8)
      throw ParseError{where + ": expected 8 fields, got " + std::to_string(f.size())};
    SweepRow r;
    bool ok = parse_int(f[0], r.n_loops) && parse_int(f[2], r.seed) && parse_real(f[3], r.mean_aoi) &&
              parse_real(f[4], r.mean_lqg) && parse_real(f[5], r.padding_fraction) &&
              parse_real(f[6], r.trigger_rate) && parse_int(f[7], r.discards);
    if (!ok)
      throw ParseError{where + ": malformed number"};
    try {
      r.strategy = parse_strategy(std::string{trim(f[1])});
    } catch (const ConfigValueError& e) {
      throw ParseError{where + ": " + e.what()};
    }
    table.rows.push_back(r);
  }
  if (table.rows.empty())
    throw ParseError{"CSV has no data rows"};
  return table;
}

SweepTable
read_csv(const std::filesystem::path& path)
{
  return parse_csv(read_file(path));
}

// ---------------------------------------------------------------------------
// SVG

PlotMetric
parse_plot_metric(const std::string& text)
{
  if (text == "aoi")
    return PlotMetric::aoi;
  if (text == "lqg")
    return PlotMetric::lqg;
  throw ConfigValueError{"unknown plot metric '" + text + "' (expected aoi or lqg)"};
}

namespace {

std::string
fixed(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string
tick_label(double v)
{
  char buf[40];
  if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-2))
    std::snprintf(buf, sizeof buf, "%.0e", v);
  else
    std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string
escape(std::string_view s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

/// 1, 2, 5 steps giving roughly `target` ticks over [lo, hi].
double
nice_step(double span, int target)
{
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw)
      return m * mag;
  }
  return 10.0 * mag;
}

} // namespace

std::string
render_svg(const SweepTable& table, const PlotSpec& spec)
{
  const auto summary = summarize(table);
  std::set<std::size_t> n_set;
  std::vector<Strategy> strategies;
  for (const auto& s : summary) {
    n_set.insert(s.n_loops);
    if (std::find(strategies.begin(), strategies.end(), s.strategy) == strategies.end())
      strategies.push_back(s.strategy);
  }
  if (n_set.size() < 2)
    throw ParseError{"plotting needs at least two distinct N values"};

  auto band_of = [&](const SummaryRow& s) -> const Band& { return spec.metric == PlotMetric::aoi ? s.aoi : s.lqg; };

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : summary) {
    lo = std::min(lo, band_of(s).min);
    hi = std::max(hi, band_of(s).max);
  }
  const bool log_y = lo > 0.0 && hi / lo > 1e3;

  double y0;
  double y1;
  std::vector<double> ticks;
  if (log_y) {
    y0 = std::floor(std::log10(lo));
    y1 = std::ceil(std::log10(hi));
    if (y1 == y0)
      y1 += 1.0;
    const double step = std::max(1.0, std::ceil((y1 - y0) / 8.0));
    for (double d = y0; d <= y1 + 1e-9; d += step)
      ticks.push_back(d);
  } else {
    y0 = std::min(0.0, lo);
    y1 = hi > y0 ? hi : y0 + 1.0;
    const double step = nice_step(y1 - y0, 5);
    y1 = std::ceil(y1 / step) * step;
    for (double v = y0; v <= y1 + step * 1e-9; v += step)
      ticks.push_back(v);
  }

  const double left = 80, right = 150, top = 40, bottom = 60;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  const double x_min = static_cast<double>(*n_set.begin());
  const double x_max = static_cast<double>(*n_set.rbegin());
  auto px = [&](double n) { return left + (n - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double v) {
    const double t = log_y ? (std::log10(v) - y0) / (y1 - y0) : (v - y0) / (y1 - y0);
    return top + (1.0 - t) * ph;
  };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
    << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height << "\" fill=\"white\"/>\n";

  // axes and grid
  o << "<g stroke=\"#cccccc\" stroke-width=\"0.5\">\n";
  for (double t : ticks) {
    const double y = log_y ? py(std::pow(10.0, t)) : py(t);
    o << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(left + pw) << "\" y2=\""
      << fixed(y) << "\"/>\n";
  }
  o << "</g>\n";
  o << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw) << "\" height=\""
    << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<g text-anchor=\"end\">\n";
  for (double t : ticks) {
    const double v = log_y ? std::pow(10.0, t) : t;
    o << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(py(v) + 4) << "\">" << tick_label(v) << "</text>\n";
  }
  o << "</g>\n<g text-anchor=\"middle\">\n";
  for (auto n : n_set)
    o << "<text x=\"" << fixed(px(static_cast<double>(n))) << "\" y=\"" << fixed(top + ph + 18) << "\">" << n
      << "</text>\n";
  o << "</g>\n";
  o << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(spec.height - 15.0)
    << "\" text-anchor=\"middle\">Number of control loops N</text>\n";
  const char* y_label = spec.metric == PlotMetric::aoi ? "Mean AoI [slots]" : "Mean LQG cost [per slot]";
  o << "<text x=\"18\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << fixed(top + ph / 2) << ")\">" << y_label << (log_y ? " (log)" : "") << "</text>\n";

  // bands first so every line stays visible
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    const auto* color = kPalette[k % std::size(kPalette)];
    std::vector<const SummaryRow*> rows;
    for (const auto& s : summary)
      if (s.strategy == strategies[k])
        rows.push_back(&s);
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->n_loops < b->n_loops; });

    o << "<polygon class=\"band\" data-strategy=\"" << escape(to_string(strategies[k])) << "\" fill=\"" << color
      << "\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
    for (auto* s : rows)
      o << fixed(px(static_cast<double>(s->n_loops))) << ',' << fixed(py(band_of(*s).max)) << ' ';
    for (auto it = rows.rbegin(); it != rows.rend(); ++it)
      o << fixed(px(static_cast<double>((*it)->n_loops))) << ',' << fixed(py(band_of(**it).min)) << ' ';
    o << "\"/>\n";
  }
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    const auto* color = kPalette[k % std::size(kPalette)];
    std::vector<const SummaryRow*> rows;
    for (const auto& s : summary)
      if (s.strategy == strategies[k])
        rows.push_back(&s);
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->n_loops < b->n_loops; });

    o << "<polyline class=\"mean\" data-strategy=\"" << escape(to_string(strategies[k])) << "\" fill=\"none\" stroke=\""
      << color << "\" stroke-width=\"2\" points=\"";
    for (auto* s : rows)
      o << fixed(px(static_cast<double>(s->n_loops))) << ',' << fixed(py(band_of(*s).mean)) << ' ';
    o << "\"/>\n";

    const double ly = top + 10 + 20.0 * static_cast<double>(k);
    o << "<line x1=\"" << fixed(left + pw + 15) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(left + pw + 40)
      << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << fixed(left + pw + 46) << "\" y=\"" << fixed(ly + 4) << "\">"
      << escape(to_string(strategies[k])) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void
render_plot(const std::filesystem::path& csv_path, const PlotSpec& spec, const std::filesystem::path& out_path)
{
  write_file(out_path, render_svg(read_csv(csv_path), spec));
}

// ---------------------------------------------------------------------------
// configuration

namespace {

template<typename T>
T
int_value(std::string_view key, std::string_view v)
{
  T out{};
  if (!parse_int(v, out))
    throw ConfigValueError{"config key '" + std::string{key} + "': not an unsigned integer: '" + std::string{v} + "'"};
  return out;
}

double
real_value(std::string_view key, std::string_view v)
{
  double out = 0.0;
  if (!parse_real(v, out))
    throw ConfigValueError{"config key '" + std::string{key} + "': not a number: '" + std::string{v} + "'"};
  return out;
}

bool
bool_value(std::string_view key, std::string_view v)
{
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  throw ConfigValueError{"config key '" + std::string{key} + "': not a boolean: '" + std::string{v} + "'"};
}

} // namespace

SimConfig
parse_config(std::string_view text)
{
  SimConfig c;
  std::optional<bool> tis;
  std::set<std::string, std::less<>> seen;

  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigValueError{"config line " + std::to_string(line_no) + ": expected key=value"};
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second)
      throw ConfigKeyError{"config key '" + std::string{key} + "' given twice"};

    try {
      if (key == "n_loops")
        c.n_loops = int_value<std::size_t>(key, value);
      else if (key == "horizon")
        c.horizon = int_value<std::uint64_t>(key, value);
      else if (key == "warmup")
        c.warmup = int_value<std::uint64_t>(key, value);
      else if (key == "strategy")
        c.strategy = parse_strategy(std::string{value});
      else if (key == "tis")
        tis = bool_value(key, value);
      else if (key == "policy")
        c.policy = parse_policy_kind(std::string{value});
      else if (key == "seed")
        c.seed = int_value<std::uint64_t>(key, value);
      else if (key == "repetitions")
        c.repetitions = int_value<std::size_t>(key, value);
      else if (key == "loss_prob")
        c.link.loss_prob = real_value(key, value);
      else if (key == "loss_model")
        c.link.loss_model = parse_loss_model(std::string{value});
      else if (key == "tb_capacity")
        c.link.tb_capacity = int_value<std::size_t>(key, value);
      else if (key == "payload_size")
        c.payload_size = int_value<std::size_t>(key, value);
      else if (key == "compound_fifo_max")
        c.compound_fifo_max = int_value<std::size_t>(key, value);
      else if (key == "stale_drop")
        c.stale_drop_slots = int_value<std::uint32_t>(key, value);
      else if (key == "deadband")
        c.deadband = real_value(key, value);
      else if (key == "plant.a_min")
        c.plant.a_min = real_value(key, value);
      else if (key == "plant.a_max")
        c.plant.a_max = real_value(key, value);
      else if (key == "plant.b")
        c.plant.b = real_value(key, value);
      else if (key == "sigma_w2")
        c.plant.sigma_w2 = real_value(key, value);
      else if (key == "q")
        c.plant.q = real_value(key, value);
      else if (key == "r")
        c.plant.r = real_value(key, value);
      else
        throw ConfigKeyError{"unknown config key '" + std::string{key} + "'"};
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigValueError{e.what()};
    }
  }
  if (tis)
    c.strategy.tis = *tis;
  c.validate();
  return c;
}

SimConfig
load_config(const std::filesystem::path& path)
{
  return parse_config(read_file(path));
}

} // namespace salsim
