#include <cmath>
#include <random>

#include "doctest.h"
#include "salsim/control.hpp"

using namespace salsim;

namespace {

// Positive root of b^2 P^2 + (r(1 - a^2) - q b^2) P - q r = 0.
double
riccati_closed_form(const PlantParams& p)
{
  const double B = p.r * (1.0 - p.a * p.a) - p.q * p.b * p.b;
  return (-B + std::sqrt(B * B + 4.0 * p.b * p.b * p.q * p.r)) / (2.0 * p.b * p.b);
}

double
aoi_cost_by_sum(double a, double s2, int delta)
{
  double sum = 0.0;
  for (int j = 0; j < delta; ++j)
    sum += std::pow(a, 2 * j);
  return s2 * sum;
}

} // namespace

TEST_SUITE("control")
{
  TEST_CASE("Riccati: unit plant gives the golden ratio")
  {
    const auto sol = solve_riccati_scalar(PlantParams{1, 1, 1, 1, 1});
    CHECK(std::abs(sol.P - (1.0 + std::sqrt(5.0)) / 2.0) < 1e-9);
    CHECK(sol.L == doctest::Approx(sol.P / (1.0 + sol.P)));
  }

  TEST_CASE("Riccati: memoryless plant")
  {
    const auto sol = solve_riccati_scalar(PlantParams{0, 1, 1, 1, 1});
    CHECK(sol.P == doctest::Approx(1.0));
    CHECK(sol.L == 0.0);
  }

  TEST_CASE("Riccati: huge input penalty switches control off")
  {
    double prev = 1.0;
    for (double r : {1.0, 1e2, 1e4, 1e6}) {
      const auto sol = solve_riccati_scalar(PlantParams{0.95, 1, 1, 1, r});
      CHECK(sol.L < prev);
      prev = sol.L;
    }
    CHECK(prev < 1e-5);
    CHECK(solve_riccati_scalar(PlantParams{1, 1, 1, 1, 1e9}).L < 1e-3);
  }

  TEST_CASE("Riccati matches the closed form and has a tiny residual")
  {
    std::mt19937 rng{3};
    std::uniform_real_distribution<double> ua{-1.3, 1.3}, ub{0.2, 3.0}, uq{0.1, 5.0};
    for (int k = 0; k < 200; ++k) {
      const PlantParams p{ua(rng), ub(rng), 1.0, uq(rng), uq(rng)};
      const auto sol = solve_riccati_scalar(p);
      CHECK(sol.P == doctest::Approx(riccati_closed_form(p)).epsilon(1e-9));
      CHECK(riccati_residual(p, sol.P) < 1e-10);
      CHECK(sol.L == doctest::Approx(p.a * p.b * sol.P / (p.r + p.b * p.b * sol.P)));
      // closed loop is stable
      CHECK(std::abs(p.a - p.b * sol.L) < 1.0);
    }
  }

  TEST_CASE("plant parameters are validated")
  {
    CHECK_THROWS_AS(solve_riccati_scalar(PlantParams{1.4, 1, 1, 1, 1}), ConfigValueError);
    CHECK_THROWS_AS(solve_riccati_scalar(PlantParams{1, 0, 1, 1, 1}), ConfigValueError);
    CHECK_THROWS_AS(solve_riccati_scalar(PlantParams{1, 1, 0, 1, 1}), ConfigValueError);
    CHECK_THROWS_AS(solve_riccati_scalar(PlantParams{1, 1, 1, 0, 1}), ConfigValueError);
    CHECK_THROWS_AS(solve_riccati_scalar(PlantParams{1, 1, 1, 1, -1}), ConfigValueError);
  }

  TEST_CASE("plant step, control and stage cost")
  {
    const PlantParams unit{1, 1, 1, 1, 1};
    CHECK(plant_step(unit, 2, -1, 0) == 1.0);
    CHECK(plant_step(unit, 0, 0, 0) == 0.0);
    CHECK(plant_step(PlantParams{1.1, 1, 1, 1, 1}, 1, 0, 0.5) == doctest::Approx(1.6));

    CHECK(compute_control(0.7, 0.0) == 0.0);
    CHECK(compute_control(0.5, 2.0) == -1.0);
    CHECK(compute_control(0.5, -3.0) > 0.0);

    CHECK(stage_cost(0, 0, 1, 1) == 0.0);
    CHECK(stage_cost(1, -1, 1, 1) == 2.0);
    CHECK(stage_cost(3, 0, 2, 1) == 18.0);
  }

  TEST_CASE("estimator: fresh sample, prediction and replay")
  {
    const PlantParams unit{1, 1, 1, 1, 1};
    CHECK(replay_estimate(unit, 3.0, {}) == 3.0);
    CHECK(predict(unit, 3.0, -1.0) == 2.0);
    const double inputs[] = {-1.0, 0.0};
    CHECK(replay_estimate(unit, 1.0, inputs) == 0.0);

    const PlantParams p{1.1, 0.5, 1, 1, 1};
    const double u3[] = {0.2, -0.4, 1.0};
    const double by_hand = 1.1 * (1.1 * (1.1 * 2.0 + 0.5 * 0.2) + 0.5 * -0.4) + 0.5 * 1.0;
    CHECK(replay_estimate(p, 2.0, u3) == doctest::Approx(by_hand));
  }

  TEST_CASE("estimator is exact without noise after the sample")
  {
    std::mt19937 rng{11};
    std::normal_distribution<double> g;
    for (double a : {0.9, 1.0, 1.2}) {
      PlantLoop loop{PlantParams{a, 1, 1, 1, 1}};
      double held_x = 0.0;
      std::uint64_t held_gen = 0;
      for (std::uint64_t t = 0; t < 60; ++t) {
        const bool noisy = t <= 20;
        loop.step(noisy ? g(rng) : 0.0);
        if (t == 20) {
          held_x = loop.x();
          held_gen = t;
        }
        if (t > 20 && t % 7 == 0) {
          loop.estimate_delivery(held_x, held_gen, t);
          CHECK(loop.x_hat() == loop.x());
        } else if (t <= 20) {
          loop.estimate_delivery(loop.x(), t, t);
        } else {
          loop.estimate_no_delivery();
        }
        loop.control(t);
      }
    }
  }

  TEST_CASE("aoi cost: examples and the direct-sum oracle")
  {
    CHECK(aoi_cost(1.0, 1.0, 4) == 4.0);
    CHECK(aoi_cost(0.3, 7.0, 0) == 0.0);
    CHECK(aoi_cost(1.1, 1.0, 3) == doctest::Approx(3.6741).epsilon(1e-12));
    CHECK(aoi_cost(1.1, 1.0, 3) == doctest::Approx(aoi_cost_by_sum(1.1, 1.0, 3)).epsilon(1e-14));

    for (double a : {0.0, 0.5, 0.9, 0.999, 1.0, 1.001, 1.05, 1.2, 1.3, -1.1}) {
      for (int d : {1, 2, 10, 64, 65, 100, 300}) {
        const double expect = aoi_cost_by_sum(a, 2.0, d);
        CHECK(aoi_cost(a, 2.0, static_cast<std::uint64_t>(d)) == doctest::Approx(expect).epsilon(1e-9));
        if (a * a != 1.0) {
          const double closed = 2.0 * (std::pow(a, 2.0 * d) - 1.0) / (a * a - 1.0);
          CHECK(closed == doctest::Approx(expect).epsilon(1e-9));
        }
      }
    }
  }

  TEST_CASE("aoi cost is increasing, and convex for unstable plants")
  {
    for (double a = 0.5; a <= 1.3001; a += 0.05) {
      double prev2 = aoi_cost(a, 1.0, 0);
      double prev1 = aoi_cost(a, 1.0, 1);
      CHECK(prev1 > prev2);
      for (std::uint64_t d = 2; d < 200; ++d) {
        const double cur = aoi_cost(a, 1.0, d);
        if (a < 1.0 && cur == prev1)
          break; // saturated in double precision
        CHECK(cur > prev1);
        if (std::abs(a) > 1.0)
          CHECK(cur - 2 * prev1 + prev2 >= -1e-12 * cur);
        prev2 = prev1;
        prev1 = cur;
      }
    }
  }

  TEST_CASE("perfect information: mean stage cost approaches sigma^2 P")
  {
    for (double a : {0.9, 1.0, 1.2}) {
      const PlantParams p{a, 1, 1, 1, 1};
      PlantLoop loop{p, 100'000};
      std::mt19937_64 rng{5};
      std::normal_distribution<double> g;
      double sum = 0.0;
      const std::uint64_t warm = 1000, T = 100'000;
      for (std::uint64_t t = 0; t < T; ++t) {
        loop.step(g(rng));
        loop.estimate_delivery(loop.x(), t, t);
        const double u = loop.control(t);
        if (t >= warm)
          sum += stage_cost(loop.x(), u, p.q, p.r);
      }
      const double mean = sum / static_cast<double>(T - warm);
      CHECK(mean == doctest::Approx(p.sigma_w2 * loop.riccati()).epsilon(0.05));
    }
  }
}
