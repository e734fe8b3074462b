#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gllab/empirical_measure.hpp"
#include "gllab/errors.hpp"

using namespace gllab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Maximum of sum c_k f_k over |f_k| <= 1, |f_k - f_l| <= arc(theta_k, theta_l)
// by enumerating every vertex of the all-pairs polytope (n <= 3).
double brute_force_bl(const std::vector<double>& theta, const std::vector<double>& c) {
  const std::size_t n = theta.size();
  struct Row {
    std::array<double, 3> a;
    double b;
  };
  std::vector<Row> rows;
  for (std::size_t k = 0; k < n; ++k) {
    Row r{{0, 0, 0}, 1.0};
    r.a[k] = 1.0;
    rows.push_back(r);
    r.a[k] = -1.0;
    rows.push_back(r);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      const double d = std::min(std::abs(theta[k] - theta[l]), 1.0 - std::abs(theta[k] - theta[l]));
      Row r{{0, 0, 0}, d};
      r.a[k] = 1.0;
      r.a[l] = -1.0;
      rows.push_back(r);
      r.a[k] = -1.0;
      r.a[l] = 1.0;
      rows.push_back(r);
    }
  }
  double best = -1e300;
  const std::size_t m = rows.size();
  std::vector<std::size_t> pick(n);
  auto solve = [&](std::vector<double>& f) {
    // Gaussian elimination with partial pivoting on the picked rows.
    std::vector<std::array<double, 4>> A(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) A[i][j] = rows[pick[i]].a[j];
      A[i][3] = rows[pick[i]].b;
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t p = col;
      for (std::size_t i = col; i < n; ++i)
        if (std::abs(A[i][col]) > std::abs(A[p][col])) p = i;
      if (std::abs(A[p][col]) < 1e-12) return false;
      std::swap(A[p], A[col]);
      for (std::size_t i = 0; i < n; ++i) {
        if (i == col) continue;
        const double f2 = A[i][col] / A[col][col];
        for (std::size_t j = col; j < 4; ++j) A[i][j] -= f2 * A[col][j];
      }
    }
    f.resize(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = A[i][3] / A[i][i];
    return true;
  };
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t start) {
    if (depth == n) {
      std::vector<double> f;
      if (!solve(f)) return;
      for (const Row& r : rows) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) lhs += r.a[j] * f[j];
        if (lhs > r.b + 1e-10) return;
      }
      double obj = 0.0;
      for (std::size_t j = 0; j < n; ++j) obj += c[j] * f[j];
      best = std::max(best, obj);
      return;
    }
    for (std::size_t i = start; i < m; ++i) {
      pick[depth] = i;
      rec(depth + 1, i + 1);
    }
  };
  rec(0, 0);
  return best;
}

AtomicSignedMeasure random_measure(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> loc(0.0, 1.0);
  std::normal_distribution<double> w(0.0, 0.5);
  AtomicSignedMeasure g;
  for (std::size_t k = 0; k < n; ++k) {
    g.locations.push_back(loc(rng));
    g.weights.push_back(w(rng));
  }
  return g;
}

AtomicSignedMeasure scaled(AtomicSignedMeasure g, double c) {
  for (double& w : g.weights) w *= c;
  return g;
}

}  // namespace

TEST_CASE("empirical measure of a lattice state") {
  const AtomicSignedMeasure ones = from_state(std::vector<double>(10, 1.0));
  CHECK(std::abs(ones.total_variation() - 1.0) < 1e-15);
  CHECK(std::abs(pair(ones, [](double) { return 1.0; }) - 1.0) < 1e-15);
  CHECK(ones.locations.back() == 0.0);
  CHECK(ones.locations.front() == 0.1);

  const AtomicSignedMeasure pm = from_state(std::vector<double>{2.0, -2.0});
  CHECK(pm.total_variation() == 2.0);
  CHECK(pair(pm, [](double) { return 1.0; }) == 0.0);

  std::vector<double> x(100);
  for (std::size_t i = 0; i < 100; ++i) x[i] = std::sin(kTwoPi * static_cast<double>(i + 1) / 100.0);
  CHECK(std::abs(pair(from_state(x), [](double t) { return std::sin(kTwoPi * t); }) - 0.5) < 1.0 / 100);

  const AtomicSignedMeasure zero;
  CHECK(pair(zero, [](double t) { return std::cos(t); }) == 0.0);
}

TEST_CASE("arc distance wraps around the circle") {
  CHECK(arc_distance(0.1, 0.9) == doctest::Approx(0.2));
  CHECK(arc_distance(0.0, 0.5) == 0.5);
  CHECK(arc_distance(0.25, 0.25) == 0.0);
}

TEST_CASE("bl distance on small measures matches the brute-force oracle") {
  const AtomicSignedMeasure d0{{0.0}, {1.0}}, dq{{0.25}, {1.0}};
  CHECK(bl_distance(d0, d0) == 0.0);
  CHECK(std::abs(bl_distance(d0, dq) - 0.25) < 1e-12);
  CHECK(std::abs(brute_force_bl({0.0, 0.25}, {1.0, -1.0}) - 0.25) < 1e-12);

  const AtomicSignedMeasure a{{0.0}, {3.0}}, b{{0.5}, {3.0}};
  const double ref = brute_force_bl({0.0, 0.5}, {3.0, -3.0});
  CHECK(std::abs(ref - 1.5) < 1e-12);
  CHECK(std::abs(bl_distance(a, b) - ref) < 1e-12);

  // Unbalanced mass: the bound |f| <= 1 binds.
  const AtomicSignedMeasure c{{0.1, 0.2}, {2.0, 0.5}}, d{{0.7}, {-1.0}};
  CHECK(std::abs(bl_distance(c, d) - brute_force_bl({0.1, 0.2, 0.7}, {2.0, 0.5, 1.0})) < 1e-12);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const AtomicSignedMeasure g1 = random_measure(rng, 2), g2 = random_measure(rng, 1);
    std::vector<double> theta{g1.locations[0], g1.locations[1], g2.locations[0]};
    std::vector<double> w{g1.weights[0], g1.weights[1], -g2.weights[0]};
    CHECK(std::abs(bl_distance(g1, g2) - brute_force_bl(theta, w)) < 1e-10);
  }
}

TEST_CASE("single location measures") {
  const AtomicSignedMeasure a{{0.3}, {-0.7}};
  CHECK(std::abs(bl_distance(a, AtomicSignedMeasure{}) - 0.7) < 1e-15);
  // Atoms at 1.0 and 0.0 are the same point.
  const AtomicSignedMeasure b{{1.0}, {1.0}}, c{{0.0}, {1.0}};
  CHECK(bl_distance(b, c) == 0.0);
}

TEST_CASE("bl distance metric properties on random measures") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_measure(rng, 12), b = random_measure(rng, 9), c = random_measure(rng, 15);
    const double ab = bl_distance(a, b), ba = bl_distance(b, a), bc = bl_distance(b, c), ac = bl_distance(a, c);
    CHECK(std::abs(ab - ba) < 1e-10);
    CHECK(ac <= ab + bc + 1e-10);
    CHECK(std::abs(bl_distance(scaled(a, 2.5), scaled(b, 2.5)) - 2.5 * ab) < 1e-9);

    AtomicSignedMeasure diff = a;
    for (std::size_t k = 0; k < b.size(); ++k) {
      diff.locations.push_back(b.locations[k]);
      diff.weights.push_back(-b.weights[k]);
    }
    CHECK(ab <= diff.total_variation() + 1e-12);

    // Dual feasibility: a few functions with sup and Lipschitz norms at most 1.
    const double shift = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const std::vector<std::function<double(double)>> fs{
        [](double) { return 1.0; },
        [](double t) { return std::sin(kTwoPi * t) / kTwoPi; },
        [shift](double t) { return std::min(1.0, 3.0 * arc_distance(t, shift) / 3.0) - 0.2; },
        [shift](double t) { return std::cos(kTwoPi * (t - shift)) / (2.0 * kTwoPi); }};
    for (const auto& f : fs) CHECK(std::abs(pair(diff, f)) <= ab + 1e-10);
  }
}

TEST_CASE("bl distance size cap") {
  std::mt19937_64 rng(5);
  const auto a = random_measure(rng, 20), b = random_measure(rng, 20);
  CHECK_THROWS_AS(bl_distance(a, b, 30), SizeCapExceeded);
  CHECK_NOTHROW(bl_distance(a, b, 40));
}

TEST_CASE("bl distance with a few hundred atoms") {
  std::mt19937_64 rng(6);
  const auto a = random_measure(rng, 128), b = random_measure(rng, 128);
  const double d = bl_distance(a, b);
  CHECK(d > 0.0);
  CHECK(std::isfinite(d));
}

TEST_CASE("path metric takes the maximum over snapshots") {
  const AtomicSignedMeasure z{{0.5}, {0.0}}, one{{0.5}, {0.3}};
  MeasurePath p{{0.0, 0.5, 1.0}, {z, z, z}};
  MeasurePath q{{0.0, 0.5, 1.0}, {z, one, z}};
  CHECK(d_star(p, p) == 0.0);
  CHECK(std::abs(d_star(p, q) - 0.3) < 1e-15);
  MeasurePath r{{0.0, 0.4, 1.0}, {z, z, z}};
  CHECK_THROWS_AS(d_star(p, r), TimeGridMismatch);
}

TEST_CASE("density embedding as atoms") {
  const std::vector<double> c(64, 1.7);
  CHECK(std::abs(density_to_atoms(c, 32).total_variation() - 1.7) < 1e-14);

  std::vector<double> s(128);
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = std::sin(kTwoPi * static_cast<double>(j) / 128.0);
  CHECK(std::abs(pair(density_to_atoms(s, 64), [](double) { return 1.0; })) < 1e-14);
  CHECK_THROWS_AS(density_to_atoms(s, 256), InvalidInput);

  // Smooth non-trigonometric density: pairing error shrinks at least like 1/N^2.
  auto m = [](double t) { return std::exp(std::sin(kTwoPi * t)); };
  auto J = [](double t) { return std::cos(kTwoPi * t) + 0.5 * std::sin(2 * kTwoPi * t); };
  double exact = 0.0;
  {
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double t = (i + 0.5) / n;
      exact += m(t) * J(t) / n;
    }
  }
  double prev = 1e300;
  for (std::size_t n : {8, 16, 32}) {
    std::vector<double> grid(4 * n);
    for (std::size_t j = 0; j < grid.size(); ++j) grid[j] = m(static_cast<double>(j) / grid.size());
    const double err = std::abs(pair(density_to_atoms(grid, n), J) - exact);
    CHECK(err <= prev / 3.9 + 1e-12);
    prev = err;
  }
}
