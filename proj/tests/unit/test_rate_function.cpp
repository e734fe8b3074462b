#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gllab/errors.hpp"
#include "gllab/rate_function.hpp"
#include "oracles.hpp"

using namespace gllab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const Potential& gauss() {
  static const Potential p = Potential::gaussian();
  return p;
}

double sine(double t) { return std::sin(kTwoPi * t); }

DensityField constant_path(double c, std::size_t j, std::size_t k, double horizon,
                           double slope = 0.0) {
  DensityField f;
  f.n_theta = j;
  f.n_steps = k;
  f.horizon = horizon;
  for (std::size_t l = 0; l <= k; ++l)
    for (std::size_t i = 0; i < j; ++i) f.values.push_back(c + slope * f.time(l));
  return f;
}

// Zero-mean antiderivative of g on the circle by cumulative sums, then its L2 norm.
double antiderivative_norm(const std::vector<double>& g) {
  const std::size_t n = g.size();
  const double h = 1.0 / static_cast<double>(n);
  std::vector<double> a(n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += 0.5 * (g[j] + g[(j + 1) % n]) * h;
    a[j] = acc;
  }
  double mean = 0.0;
  for (double v : a) mean += v / n;
  double s = 0.0;
  for (double v : a) s += (v - mean) * (v - mean) * h;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("initial cost") {
  CHECK(std::abs(initial_cost(std::vector<double>(16, 0.0), gauss())) < 1e-12);
  const auto [h1, l1] = oracle::grid_legendre([](double l) { return 0.5 * l * l; }, 1.0, -5.0, 5.0, 10000);
  CHECK(std::abs(h1 - 0.5) < 1e-10);
  CHECK(std::abs(initial_cost(std::vector<double>(16, 1.0), gauss()) - h1) < 1e-10);
  const auto m0 = sample_on_grid([](double t) { return 0.8 * sine(t); }, 64);
  const double ref = oracle::simpson([](double t) { return 0.5 * std::pow(0.8 * sine(t), 2); }, 0.0, 1.0, 1000);
  CHECK(std::abs(initial_cost(m0, gauss()) - ref) < 1e-10);
  CHECK_THROWS_AS(initial_cost(std::vector<double>(4, 100.0), gauss()), RootNotBracketed);
}

TEST_CASE("minimal control of an uncontrolled solution vanishes") {
  const auto m0 = sample_on_grid([](double t) { return 0.8 * sine(t); }, 64);
  const DensityField f = solve_pde(m0, gauss(), 0.05);
  const MinimalControl mc = minimal_control(f, gauss());
  CHECK(mc.feasible);
  CHECK(mc.u_star.l2_norm_sq() < 1e-16);
}

TEST_CASE("mass creation is infeasible") {
  const DensityField f = constant_path(0.2, 16, 10, 0.1, 0.5);
  const MinimalControl mc = minimal_control(f, gauss());
  CHECK_FALSE(mc.feasible);
  CHECK(std::abs(mc.mass_defect - 0.5) < 1e-9);
  const RateDecomposition r = rate(f, gauss());
  CHECK_FALSE(r.feasible);
  CHECK(std::isinf(r.total));
}

TEST_CASE("minimal control round trip through the solver") {
  for (const Potential& pot : {gauss(), Potential::quartic(1.0, 0.3)}) {
    CAPTURE(pot.name());
    const std::size_t j = 64;
    const double horizon = 0.05;
    const auto m0 = sample_on_grid([](double t) { return 0.3 * sine(t) + 0.1; }, j);
    const std::size_t k = stable_step_count(m0, pot, horizon) * 2;
    const ControlGrid u = ControlGrid::from_function(k, j, horizon, [](double t, double th) {
      return (1.0 - 4.0 * t) * std::cos(kTwoPi * th) + 0.5 * std::sin(2 * kTwoPi * th);
    });
    const DensityField f = solve_controlled_pde(m0, u, pot, horizon);
    const MinimalControl mc = minimal_control(f, pot);
    CHECK(mc.feasible);
    double diff = 0.0;
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t i = 0; i < j; ++i) diff = std::max(diff, std::abs(mc.u_star.face_value(l, i) - u.face_value(l, i)));
    CHECK(diff < 1e-6);

    // Re-solving with u* reproduces the path.
    const DensityField g = solve_controlled_pde(m0, mc.u_star, pot, horizon);
    double dm = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) dm = std::max(dm, std::abs(f.values[i] - g.values[i]));
    CHECK(dm < 1e-9);
  }
}

TEST_CASE("rate decomposition oracles") {
  const RateDecomposition one = rate(constant_path(1.0, 32, 20, 0.1), gauss());
  CHECK(one.feasible);
  CHECK(std::abs(one.total - 0.5) < 1e-9);
  CHECK(one.dynamic_cost == 0.0);

  const RateDecomposition zero = rate(constant_path(0.0, 32, 20, 0.1), gauss());
  CHECK(std::abs(zero.total) < 1e-12);

  const auto m0 = sample_on_grid([](double t) { return 0.8 * sine(t); }, 64);
  const RateDecomposition heat = rate(solve_pde(m0, gauss(), 0.05), gauss());
  CHECK(heat.feasible);
  CHECK(std::abs(heat.total - 0.16) < 1e-6);
  CHECK(std::abs(heat.dynamic_cost - 0.5 * heat.minimal_control.recompute_l2_norm_sq()) <= 1e-12);
}

TEST_CASE("perturbing a solution path increases the rate") {
  const std::size_t j = 32;
  const auto m0 = sample_on_grid([](double t) { return 0.5 * sine(t); }, j);
  const DensityField base = solve_pde(m0, gauss(), 0.05);
  const double r0 = rate(base, gauss()).total;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d(0.0, 0.01);
  for (int trial = 0; trial < 5; ++trial) {
    DensityField p = base;
    for (std::size_t l = 1; l <= p.n_steps; ++l) {
      // Zero-mean perturbation applied to each later level.
      const double a = d(rng), b = d(rng);
      for (std::size_t i = 0; i < j; ++i)
        p.level(l)[i] += a * std::cos(2 * kTwoPi * p.theta(i)) + b * std::sin(3 * kTwoPi * p.theta(i));
    }
    const RateDecomposition r = rate(p, gauss());
    CHECK(r.feasible);
    CHECK(r.total > r0);
  }
}

TEST_CASE("H^-1 seminorm") {
  CHECK(h_minus_one_seminorm(std::vector<double>(32, 0.0)) == 0.0);
  const std::size_t n = 256;
  std::vector<double> c(n), s2(n), odd(255);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) / n;
    c[j] = std::cos(kTwoPi * t);
    s2[j] = sine(t) + std::sin(2 * kTwoPi * t);
  }
  for (std::size_t j = 0; j < odd.size(); ++j) odd[j] = std::cos(kTwoPi * static_cast<double>(j) / 255.0);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(h_minus_one_seminorm(c) - 1.0 / (kTwoPi * std::sqrt(2.0))) < 1e-12);
  CHECK(std::abs(h_minus_one_seminorm(odd) - 1.0 / (kTwoPi * std::sqrt(2.0))) < 1e-12);
  CHECK(std::abs(h_minus_one_seminorm(s2) - std::sqrt(1.0 / (8 * pi2) + 1.0 / (32 * pi2))) < 1e-12);
  CHECK(std::abs(antiderivative_norm(c) - 1.0 / (kTwoPi * std::sqrt(2.0))) < 1e-4);

  std::vector<double> shifted(c);
  for (double& v : shifted) v += 0.1;
  CHECK_THROWS_AS(h_minus_one_seminorm(shifted), NotMeanZero);

  // Non-trigonometric mean-zero input against the cumulative-sum oracle.
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) / n;
    g[j] = std::exp(std::sin(kTwoPi * t)) - std::cyl_bessel_i(0.0, 1.0);
  }
  CHECK(std::abs(h_minus_one_seminorm(g, 1e-6) - antiderivative_norm(g)) < 1e-4);
}

TEST_CASE("dual form of the dynamic cost") {
  const std::size_t j = 64;
  const double horizon = 0.05;
  const auto m0 = sample_on_grid([](double t) { return 0.3 * sine(t); }, j);
  const std::size_t k = stable_step_count(m0, gauss(), horizon);
  const ControlGrid u = ControlGrid::from_function(k, j, horizon, [](double t, double th) {
    return (1.0 + t) * std::cos(kTwoPi * th) + 0.3 * std::sin(2 * kTwoPi * th);
  });
  const DensityField f = solve_controlled_pde(m0, u, gauss(), horizon);
  const RateDecomposition r = rate(f, gauss());
  const double dual = dual_dynamic_cost(f, gauss());
  CHECK(std::abs(dual - r.dynamic_cost) < 5e-3 * r.dynamic_cost);
}
