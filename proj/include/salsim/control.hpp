#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "salsim/errors.hpp"

namespace salsim {

/// Scalar LTI plant x' = a x + b u + w with quadratic stage cost q x^2 + r u^2.
struct PlantParams
{
  double a = 1.0;
  double b = 1.0;
  double sigma_w2 = 1.0;
  double q = 1.0;
  double r = 1.0;

  /// Throws ConfigValueError when a parameter is out of range
  /// (sigma_w2, q, r > 0; b != 0; |a| <= 1.3).
  void validate() const;
};

struct RiccatiSolution
{
  double P = 0.0;
  double L = 0.0;
  std::uint64_t iterations = 0;
};

inline constexpr double kRiccatiTolerance = 1e-12;
inline constexpr std::uint64_t kRiccatiMaxIterations = 1'000'000;

/// Stabilizing fixed point of P = q + a^2 P - (a b P)^2 / (r + b^2 P) by
/// fixed-point iteration from P = q. Throws RiccatiError on non-convergence.
RiccatiSolution solve_riccati_scalar(const PlantParams& p);

/// |P - riccati_map(P)| for the given parameters.
double riccati_residual(const PlantParams& p, double P);

/// Expected squared open-loop prediction error after `delta` slots:
/// sigma_w2 * sum_{j=0}^{delta-1} a^{2j}. Zero for delta == 0.
double aoi_cost(double a, double sigma_w2, std::uint64_t delta);

inline double
stage_cost(double x, double u, double q, double r) noexcept
{
  return q * x * x + r * u * u;
}

inline double
plant_step(const PlantParams& p, double x, double u, double w) noexcept
{
  return p.a * x + p.b * u + w;
}

inline double
compute_control(double gain, double x_hat) noexcept
{
  return -gain * x_hat;
}

/// Open-loop prediction one slot ahead.
inline double
predict(const PlantParams& p, double x_hat, double u) noexcept
{
  return p.a * x_hat + p.b * u;
}

/// Estimate at the current slot from a sample `x_rx` taken `inputs.size()`
/// slots ago, replaying the inputs applied since then (oldest first).
double replay_estimate(const PlantParams& p, double x_rx, std::span<const double> inputs) noexcept;

/// One control loop as seen by the simulation: the true plant, a
/// certainty-equivalent controller with an AoI-driven estimator, and the
/// controller's log of applied inputs for replay.
class PlantLoop
{
public:
  explicit PlantLoop(const PlantParams& params, std::size_t horizon_hint = 0);

  const PlantParams& params() const noexcept { return params_; }
  double gain() const noexcept { return gain_; }
  double riccati() const noexcept { return riccati_; }

  double x() const noexcept { return x_; }
  double x_hat() const noexcept { return x_hat_; }
  double u() const noexcept { return u_; }

  /// Advances the true plant with the last applied input.
  void step(double w) noexcept { x_ = plant_step(params_, x_, u_, w); }

  /// No sample arrived this slot: propagate the estimate open loop.
  void estimate_no_delivery() noexcept { x_hat_ = predict(params_, x_hat_, u_); }

  /// A sample taken at slot `gen` arrived during slot `now` (gen <= now).
  void estimate_delivery(double x_rx, std::uint64_t gen, std::uint64_t now);

  /// Computes and records u = -L x_hat for the step from `now` to `now + 1`.
  double control(std::uint64_t now);

private:
  PlantParams params_;
  double gain_ = 0.0;
  double riccati_ = 0.0;
  double x_ = 0.0;
  double x_hat_ = 0.0;
  double u_ = 0.0;
  // inputs_[k] is the input applied on the step from slot k to k + 1
  std::vector<double> inputs_;
};

} // namespace salsim
