#pragma once

// Initial data as a product measure pi(dx dtheta) = pi_1(dx | theta) dtheta.
// Site i draws theta uniformly from ((i-1)/N, i/N] and then x from
// pi_1(. | theta), which realizes the cell-averaged law exactly.

#include <cstddef>
#include <functional>
#include <string>

#include "gllab/particle_system.hpp"
#include "gllab/potential.hpp"
#include "gllab/rng.hpp"

namespace gllab {

struct ProfileMeasure {
  std::string name;
  std::function<double(double theta, Rng& rng)> conditional_sampler;
  std::function<double(double theta)> conditional_mean;
  /// R(pi_1(. | theta) || Phi).
  std::function<double(double theta)> entropy_density;
};

/// pi_1(. | theta) = Phi for every theta.
ProfileMeasure equilibrium_profile(const Potential& pot);

/// pi_1(. | theta) = delta at m0(theta). Its entropy is infinite.
ProfileMeasure point_mass_profile(std::function<double(double)> m0);

/// Local-equilibrium profile with mean m0(theta): the tilt lambda(theta) = h'(m0(theta)).
ProfileMeasure tilted_profile(const Potential& pot, std::function<double(double)> m0,
                              std::string name = "tilted");

/// Tilt given directly as lambda(theta).
ProfileMeasure tilt_field_profile(const Potential& pot, std::function<double(double)> lambda,
                                  std::string name = "tilt_field");

/// m0(theta) = amplitude * sin(2 pi theta).
ProfileMeasure tilted_sine_profile(const Potential& pot, double amplitude);

/// m0(theta) = c.
ProfileMeasure constant_profile(const Potential& pot, double c);

/// Lower edge of site i's cell plus (1 - u) / N, so theta lies in ((i-1)/N, i/N].
double cell_position(std::size_t site, std::size_t n_sites, double u);

LatticeState sample_initial_from_profile(const ProfileMeasure& profile, std::size_t n_sites, Rng& rng);

/// (1/N) sum_i N int_cell R(pi_1(. | theta) || Phi) dtheta, by 5-point
/// Gauss-Legendre in each cell.
double entropy_cost_of_profile(const ProfileMeasure& profile, std::size_t n_sites);

}  // namespace gllab
