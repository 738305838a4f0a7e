#include "salsim/control.hpp"

#include <cmath>
#include <string>

namespace salsim {

void
PlantParams::validate() const
{
  auto fail = [](const std::string& what) { throw ConfigValueError{"plant parameter " + what}; };
  if (!(sigma_w2 > 0.0))
    fail("sigma_w2 must be > 0");
  if (!(q > 0.0))
    fail("q must be > 0");
  if (!(r > 0.0))
    fail("r must be > 0");
  if (b == 0.0 || !std::isfinite(b))
    fail("b must be non-zero");
  if (!(std::abs(a) <= 1.3))
    fail("|a| must be <= 1.3");
}

namespace {

double
riccati_map(const PlantParams& p, double P) noexcept
{
  const double abP = p.a * p.b * P;
  return p.q + p.a * p.a * P - abP * abP / (p.r + p.b * p.b * P);
}

} // namespace

double
riccati_residual(const PlantParams& p, double P)
{
  return std::abs(P - riccati_map(p, P));
}

RiccatiSolution
solve_riccati_scalar(const PlantParams& p)
{
  p.validate();
  double P = p.q;
  for (std::uint64_t it = 1; it <= kRiccatiMaxIterations; ++it) {
    const double next = riccati_map(p, P);
    if (!std::isfinite(next))
      break;
    const bool done = std::abs(next - P) < kRiccatiTolerance;
    P = next;
    if (done) {
      const double L = p.a * p.b * P / (p.r + p.b * p.b * P);
      return {P, L, it};
    }
  }
  throw RiccatiError{"Riccati iteration did not converge (a=" + std::to_string(p.a) + ")"};
}

double
aoi_cost(double a, double sigma_w2, std::uint64_t delta)
{
  if (delta == 0)
    return 0.0;
  if (delta <= 64) {
    const double a2 = a * a;
    double sum = 0.0;
    double term = 1.0;
    for (std::uint64_t j = 0; j < delta; ++j) {
      sum += term;
      term *= a2;
    }
    return sigma_w2 * sum;
  }
  if (a == 0.0)
    return sigma_w2;
  const double d = (a - 1.0) * (a + 1.0);
  if (d == 0.0)
    return sigma_w2 * static_cast<double>(delta);
  return sigma_w2 * std::expm1(static_cast<double>(delta) * std::log1p(d)) / d;
}

double
replay_estimate(const PlantParams& p, double x_rx, std::span<const double> inputs) noexcept
{
  double x = x_rx;
  for (double u : inputs)
    x = predict(p, x, u);
  return x;
}

PlantLoop::PlantLoop(const PlantParams& params, std::size_t horizon_hint)
  : params_{params}
{
  const auto sol = solve_riccati_scalar(params_);
  gain_ = sol.L;
  riccati_ = sol.P;
  inputs_.reserve(horizon_hint);
}

void
PlantLoop::estimate_delivery(double x_rx, std::uint64_t gen, std::uint64_t now)
{
  if (gen > now || now > inputs_.size())
    throw Error{"delivery of sample from slot " + std::to_string(gen) + " at slot " + std::to_string(now)};
  const auto first = static_cast<std::size_t>(gen);
  const auto count = static_cast<std::size_t>(now - gen);
  x_hat_ = replay_estimate(params_, x_rx, std::span<const double>{inputs_}.subspan(first, count));
}

double
PlantLoop::control(std::uint64_t now)
{
  u_ = compute_control(gain_, x_hat_);
  if (inputs_.size() != now)
    throw Error{"control computed out of order at slot " + std::to_string(now)};
  inputs_.push_back(u_);
  return u_;
}

} // namespace salsim
