#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "gllab/errors.hpp"
#include "gllab/particle_system.hpp"

using namespace gllab;

namespace {
const Potential& gauss() {
  static const Potential p = Potential::gaussian();
  return p;
}

LatticeState equilibrium_state(std::size_t n, Rng& rng) {
  LatticeState s;
  std::normal_distribution<double> d;
  for (std::size_t i = 0; i < n; ++i) s.charges.push_back(d(rng));
  return s;
}
}  // namespace

TEST_CASE("single site state is frozen") {
  Rng rng = make_stream(1, 0);
  LatticeState s{0.0, {0.75}};
  for (int i = 0; i < 10; ++i) s = step_uncontrolled(gauss(), s, 1e-3, rng);
  CHECK(s.charges[0] == 0.75);
  CHECK(s.time == doctest::Approx(1e-2));
}

TEST_CASE("two equal sites move by noise only and keep their sum") {
  Rng rng = make_stream(2, 0);
  const LatticeState s{0.0, {0.4, 0.4}};
  const LatticeState t = step_uncontrolled(gauss(), s, 1e-3, rng);
  Rng replay = make_stream(2, 0);
  std::normal_distribution<double> d;
  const double xi0 = d(replay), xi1 = d(replay);
  const double c = 2.0 * std::sqrt(1e-3);
  CHECK(std::abs(t.charges[0] - (0.4 + c * (xi0 - xi1))) < 1e-15);
  CHECK(std::abs(t.charges[1] - (0.4 + c * (xi1 - xi0))) < 1e-15);
  CHECK(std::abs(t.total_charge() - 0.8) < 1e-15);
}

TEST_CASE("one explicit step matches a hand computation") {
  // N = 3, quartic force, zero noise contribution checked through the drift part.
  const Potential q = Potential::quartic(1.0, 0.5);
  Rng rng = make_stream(3, 0);
  const LatticeState s{0.0, {0.2, -0.5, 1.0}};
  const double dt = 1e-4;
  const LatticeState t = step_uncontrolled(q, s, dt, rng);
  Rng replay = make_stream(3, 0);
  std::normal_distribution<double> d;
  double xi[3];
  for (double& v : xi) v = d(replay);
  const double n = 3.0;
  double dz[3];
  for (int i = 0; i < 3; ++i) {
    const int im = (i + 2) % 3;
    dz[i] = 0.5 * n * n * dt * (q.phi_prime(s.charges[im]) - q.phi_prime(s.charges[i])) + n * std::sqrt(dt) * xi[i];
  }
  for (int i = 0; i < 3; ++i) CHECK(std::abs(t.charges[i] - (s.charges[i] + dz[i] - dz[(i + 1) % 3])) < 1e-14);
}

TEST_CASE("charge conservation over many steps") {
  Rng rng = make_stream(4, 0);
  LatticeState s = equilibrium_state(64, rng);
  for (double& x : s.charges) x += 0.3;
  const double before = s.total_charge();
  LatticeStepper stepper(gauss(), 64, 1e-5);
  for (int k = 0; k < 10000; ++k) stepper.step(s, rng);
  CHECK(std::abs(s.total_charge() - before) <= 1e-8 * (1.0 + std::abs(before)));
}

TEST_CASE("controlled step increments") {
  Rng rng = make_stream(5, 0);
  const LatticeState s{0.0, {0.1, 0.2, 0.3, 0.4}};
  const std::vector<double> zero(4, 0.0);
  const ControlledStep c0 = step_controlled(gauss(), s, zero, 1e-3, rng);
  CHECK(c0.log_weight_increment == 0.0);
  CHECK(c0.cost_increment == 0.0);
  Rng a = make_stream(5, 0);
  const LatticeState u = step_uncontrolled(gauss(), s, 1e-3, a);
  CHECK(u.charges == c0.state.charges);

  Rng r2 = make_stream(6, 0), replay = make_stream(6, 0);
  const std::vector<double> psi{0.5, -1.0, 0.25, 2.0};
  const double dt = 2e-3;
  const ControlledStep c = step_controlled(gauss(), s, psi, dt, r2);
  std::normal_distribution<double> d;
  double cross = 0.0, sq = 0.0;
  for (double p : psi) {
    cross += p * d(replay);
    sq += p * p;
  }
  CHECK(std::abs(c.log_weight_increment - (-std::sqrt(dt) * cross - 0.5 * dt * sq)) < 1e-14);
  CHECK(std::abs(c.cost_increment - 0.5 * dt * sq) < 1e-16);
}

TEST_CASE("simple control pieces and cost") {
  const SimpleControl c({0.0, 0.5, 1.0}, 2, {1.0, 2.0, -3.0, 0.0});
  CHECK(c.pieces() == 2);
  CHECK(c.bound() == 3.0);
  CHECK(c.piece_at(0.0) == 0);
  CHECK(c.piece_at(0.5) == 0);
  CHECK(c.piece_at(0.5000001) == 1);
  CHECK(c.piece_at(1.0) == 1);
  CHECK(c.value(1, 0) == -3.0);
  CHECK(c.quadratic_cost() == doctest::Approx(0.5 * 0.5 * (1 + 4) + 0.5 * 0.5 * 9));
  CHECK_THROWS_AS(SimpleControl({0.0, 1.0}, 2, {1.0, 5.0}, 2.0), InvalidInput);
  CHECK_THROWS_AS(SimpleControl({0.0, 1.0}, 2, {1.0}), InvalidInput);
  CHECK_THROWS_AS(SimpleControl({0.1, 1.0}, 1, {1.0}), InvalidInput);
}

TEST_CASE("constant control accumulates its deterministic cost") {
  SimConfig cfg;
  cfg.n_sites = 4;
  cfg.horizon = 0.1;
  cfg.dt = 1e-3;
  cfg.seed = 9;
  const SimpleControl c = SimpleControl::constant(4, 0.1, 0.7);
  const LatticeState x0{0.0, std::vector<double>(4, 0.0)};
  const std::vector<double> times{0.0, 0.05, 0.1};
  const TrajectoryRecord rec = simulate_trajectory(gauss(), cfg, x0, &c, times);
  CHECK(std::abs(rec.control_cost - 0.5 * 0.1 * 4 * 0.49) < 1e-12);
  CHECK(std::abs(rec.control_cost - c.quadratic_cost()) < 1e-12);
  CHECK(rec.cost_at_samples.front() == 0.0);
  CHECK(rec.cost_at_samples.back() == rec.control_cost);
  CHECK(std::isfinite(rec.girsanov_log_weight));
}

TEST_CASE("trajectory edge cases and determinism") {
  SimConfig cfg;
  cfg.n_sites = 8;
  cfg.horizon = 0.0;
  cfg.seed = 3;
  Rng rng = make_stream(10, 0);
  const LatticeState x0 = equilibrium_state(8, rng);
  const std::vector<double> t0{0.0};
  const TrajectoryRecord r0 = simulate_trajectory(gauss(), cfg, x0, nullptr, t0);
  REQUIRE(r0.sample_times.size() == 1);
  CHECK(std::vector<double>(r0.state(0).begin(), r0.state(0).end()) == x0.charges);
  CHECK(r0.girsanov_log_weight == 0.0);

  cfg.horizon = 0.05;
  const auto times = even_sample_times(0.05, 6);
  const TrajectoryRecord a = simulate_trajectory(gauss(), cfg, x0, nullptr, times);
  const TrajectoryRecord b = simulate_trajectory(gauss(), cfg, x0, nullptr, times);
  CHECK(a.control_cost == 0.0);
  CHECK(a.girsanov_log_weight == 0.0);
  REQUIRE(a.states.size() == b.states.size());
  CHECK(std::memcmp(a.states.data(), b.states.data(), a.states.size() * sizeof(double)) == 0);

  const std::vector<double> unsorted{0.02, 0.01};
  CHECK_THROWS_AS(simulate_trajectory(gauss(), cfg, x0, nullptr, unsorted), InvalidInput);
  const std::vector<double> late{0.06};
  CHECK_THROWS_AS(simulate_trajectory(gauss(), cfg, x0, nullptr, late), InvalidInput);
}

TEST_CASE("stability bound is enforced") {
  SimConfig cfg;
  cfg.n_sites = 32;
  CHECK(cfg.resolved_dt(gauss()) == doctest::Approx(0.1 / 1024));
  cfg.dt = 1e-3;
  CHECK_THROWS_AS(cfg.validate(gauss()), InvalidInput);
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(gauss()), InvalidInput);
  const Potential q = Potential::quartic(1.0, 1.0);
  CHECK(default_stability_constant(q) < 0.1);
}

TEST_CASE("blow-up is detected") {
  const Potential q = Potential::quartic(1.0, 1.0);
  Rng rng = make_stream(1, 0);
  LatticeStepper stepper(q, 4, 0.5);
  LatticeState s{0.0, {30.0, -30.0, 30.0, -30.0}};
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 50; ++i) stepper.step(s, rng);
      }(),
      NonFiniteState);
}

TEST_CASE("stationarity of the product measure over a short run") {
  // Per-site moments at T pooled over replicas: within 4 standard errors of N(0, 1).
  SimConfig cfg;
  cfg.n_sites = 32;
  cfg.horizon = 0.02;
  cfg.dt = 1e-5;
  const std::vector<double> times{cfg.horizon};
  std::vector<double> xs;
  for (std::uint64_t r = 0; r < 100; ++r) {
    Rng rng = make_stream(77, r);
    const LatticeState x0 = equilibrium_state(32, rng);
    const TrajectoryRecord rec = simulate_trajectory(gauss(), cfg, x0, nullptr, times, rng);
    for (double x : rec.state(0)) xs.push_back(x);
  }
  double s = 0.0, s2 = 0.0;
  for (double x : xs) {
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(xs.size());
  const double mean = s / n, second = s2 / n;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
  CHECK(std::abs(second - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("girsanov weights have unit mean and match the control cost") {
  SimConfig cfg;
  cfg.n_sites = 2;
  cfg.horizon = 0.5;
  cfg.dt = 1e-3;
  const double c = 0.8;
  const SimpleControl ctl = SimpleControl::constant(2, cfg.horizon, c);
  const std::vector<double> times{cfg.horizon};
  const int m = 4000;
  double sw = 0.0, sw2 = 0.0, slw = 0.0;
  for (int r = 0; r < m; ++r) {
    Rng rng = make_stream(21, static_cast<std::uint64_t>(r));
    const TrajectoryRecord rec =
        simulate_trajectory(gauss(), cfg, LatticeState{0.0, {0.0, 0.0}}, &ctl, times, rng);
    const double w = std::exp(rec.girsanov_log_weight);
    sw += w;
    sw2 += w * w;
    slw += rec.girsanov_log_weight;
  }
  const double mw = sw / m;
  const double se = std::sqrt((sw2 / m - mw * mw) / m);
  CHECK(std::abs(mw - 1.0) < 4.0 * se);
  // E[log w] under the controlled law is -(1/2) sum psi^2 T.
  const double sd_lw = c * std::sqrt(2.0 * cfg.horizon);
  CHECK(std::abs(slw / m + 0.5 * 2 * c * c * cfg.horizon) < 4.0 * sd_lw / std::sqrt(m));
}
