#pragma once

// Signed atomic measures on the circle S = [0, 1) and the bounded-Lipschitz
// path metric.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gllab/particle_system.hpp"

namespace gllab {

struct AtomicSignedMeasure {
  std::vector<double> locations;  // in [0, 1)
  std::vector<double> weights;

  std::size_t size() const { return locations.size(); }
  double total_variation() const;
  double total_mass() const;
};

/// Arc length between two points of the circle of circumference 1.
double arc_distance(double a, double b);

/// Position of site k (0-based), i.e. (k+1)/N with 1 identified with 0.
double site_location(std::size_t site, std::size_t n_sites);

/// (1/N) sum_i X_i delta_{i/N}.
AtomicSignedMeasure from_state(std::span<const double> charges);
AtomicSignedMeasure from_state(const LatticeState& state);

double pair(const AtomicSignedMeasure& gamma, const std::function<double(double)>& f);

/// sup { <g1 - g2, f> : |f| <= 1, Lip(f) <= 1 }, solved exactly as a linear
/// program on the union of atom locations. Throws SizeCapExceeded when the
/// union has more than `size_cap` points.
double bl_distance(const AtomicSignedMeasure& g1, const AtomicSignedMeasure& g2, std::size_t size_cap = 256);

struct MeasurePath {
  std::vector<double> sample_times;
  std::vector<AtomicSignedMeasure> measures;

  void validate() const;
};

/// Max of bl_distance over the shared snapshot grid.
double d_star(const MeasurePath& p1, const MeasurePath& p2, std::size_t size_cap = 256);

/// Atoms at i/N with weight m(i/N)/N, reading m from periodic linear
/// interpolation of grid values at j/J (J = m.size() >= n_atoms).
AtomicSignedMeasure density_to_atoms(std::span<const double> m, std::size_t n_atoms);

MeasurePath path_from_trajectory(const TrajectoryRecord& record);

}  // namespace gllab
