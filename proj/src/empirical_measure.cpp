#include "gllab/empirical_measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gllab/errors.hpp"
#include "gllab/parallel.hpp"
#include "gllab/simplex.hpp"

namespace gllab {

double AtomicSignedMeasure::total_variation() const {
  double s = 0.0;
  for (double w : weights) s += std::abs(w);
  return s;
}

double AtomicSignedMeasure::total_mass() const { return pairwise_sum(weights); }

double arc_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

double site_location(std::size_t site, std::size_t n_sites) {
  return site + 1 == n_sites ? 0.0 : static_cast<double>(site + 1) / static_cast<double>(n_sites);
}

AtomicSignedMeasure from_state(std::span<const double> charges) {
  const std::size_t n = charges.size();
  AtomicSignedMeasure g;
  g.locations.resize(n);
  g.weights.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    g.locations[k] = site_location(k, n);
    g.weights[k] = charges[k] / static_cast<double>(n);
  }
  return g;
}

AtomicSignedMeasure from_state(const LatticeState& state) { return from_state(state.charges); }

double pair(const AtomicSignedMeasure& gamma, const std::function<double(double)>& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < gamma.size(); ++k) s += gamma.weights[k] * f(gamma.locations[k]);
  return s;
}

double bl_distance(const AtomicSignedMeasure& g1, const AtomicSignedMeasure& g2, std::size_t size_cap) {
  struct Atom {
    double theta;
    double w;
  };
  std::vector<Atom> atoms;
  atoms.reserve(g1.size() + g2.size());
  auto wrap = [](double t) {
    t -= std::floor(t);
    return t >= 1.0 ? 0.0 : t;
  };
  for (std::size_t k = 0; k < g1.size(); ++k) atoms.push_back({wrap(g1.locations[k]), g1.weights[k]});
  for (std::size_t k = 0; k < g2.size(); ++k) atoms.push_back({wrap(g2.locations[k]), -g2.weights[k]});
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.theta < b.theta; });

  std::vector<double> theta, c;
  for (const Atom& a : atoms) {
    if (!theta.empty() && a.theta == theta.back()) {
      c.back() += a.w;
    } else {
      theta.push_back(a.theta);
      c.push_back(a.w);
    }
  }
  const std::size_t n = theta.size();
  if (n > size_cap) {
    throw SizeCapExceeded("bl_distance: " + std::to_string(n) + " atom locations exceed the cap of " +
                          std::to_string(size_cap));
  }
  if (n == 0) return 0.0;
  if (n == 1) return std::abs(c[0]);

  // Variables y_k = f_k + 1 in [0, 2]. On the circle the Lipschitz
  // constraints between neighbours imply those between all pairs.
  const std::size_t edges = n == 2 ? 1 : n;
  const std::size_t rows = n + 2 * edges;
  std::vector<double> a(rows * n, 0.0), b(rows, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    a[k * n + k] = 1.0;
    b[k] = 2.0;
  }
  for (std::size_t e = 0; e < edges; ++e) {
    const std::size_t p = e, q = (e + 1) % n;
    const double d = arc_distance(theta[p], theta[q]);
    const std::size_t r1 = n + 2 * e, r2 = r1 + 1;
    a[r1 * n + p] = 1.0;
    a[r1 * n + q] = -1.0;
    a[r2 * n + p] = -1.0;
    a[r2 * n + q] = 1.0;
    b[r1] = d;
    b[r2] = d;
  }
  const LpSolution sol = maximize_standard_form(a, b, c);
  const double value = sol.objective - std::accumulate(c.begin(), c.end(), 0.0);
  return std::max(value, 0.0);
}

void MeasurePath::validate() const {
  if (sample_times.size() != measures.size()) throw InvalidInput("MeasurePath: times and measures differ in length");
  if (!std::is_sorted(sample_times.begin(), sample_times.end())) throw InvalidInput("MeasurePath: times not sorted");
}

double d_star(const MeasurePath& p1, const MeasurePath& p2, std::size_t size_cap) {
  p1.validate();
  p2.validate();
  if (p1.sample_times != p2.sample_times) throw TimeGridMismatch("d_star: paths use different snapshot grids");
  double best = 0.0;
  for (std::size_t s = 0; s < p1.measures.size(); ++s) {
    best = std::max(best, bl_distance(p1.measures[s], p2.measures[s], size_cap));
  }
  return best;
}

AtomicSignedMeasure density_to_atoms(std::span<const double> m, std::size_t n_atoms) {
  const std::size_t grid = m.size();
  if (n_atoms == 0) throw InvalidInput("density_to_atoms: n_atoms must be positive");
  if (grid < n_atoms) throw InvalidInput("density_to_atoms: grid coarser than the atom count");
  AtomicSignedMeasure g;
  g.locations.resize(n_atoms);
  g.weights.resize(n_atoms);
  for (std::size_t k = 0; k < n_atoms; ++k) {
    const double theta = site_location(k, n_atoms);
    const double s = theta * static_cast<double>(grid);
    auto j = static_cast<std::size_t>(s);
    const double f = s - static_cast<double>(j);
    j %= grid;
    const double value = (1.0 - f) * m[j] + f * m[(j + 1) % grid];
    g.locations[k] = theta;
    g.weights[k] = value / static_cast<double>(n_atoms);
  }
  return g;
}

MeasurePath path_from_trajectory(const TrajectoryRecord& record) {
  MeasurePath p;
  p.sample_times = record.sample_times;
  p.measures.reserve(record.sample_times.size());
  for (std::size_t s = 0; s < record.sample_times.size(); ++s) p.measures.push_back(from_state(record.state(s)));
  return p;
}

}  // namespace gllab
