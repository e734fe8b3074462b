#pragma once

// Rate function of a grid density path: the entropy cost of the initial
// profile plus half the squared L2 norm of the minimal control.

#include <cstddef>
#include <span>

#include "gllab/hydrodynamic_pde.hpp"
#include "gllab/potential.hpp"

namespace gllab {

/// dtheta * sum_j h(m0_j). Throws RootNotBracketed for unachievable values.
double initial_cost(std::span<const double> m0, const Potential& pot);

struct MinimalControl {
  /// Face fluxes of the zero-mean antiderivative, stored with FaceRule::left
  /// so that re-solving with it reproduces the path.
  ControlGrid u_star;
  bool feasible;
  /// max_k |int g(t_k, .) dtheta|.
  double mass_defect;
};

/// Per step, g = (m_{k+1} - m_k)/dt - 1/2 Lap h'(m_k), and u* solves
/// du/dtheta = -g with zero mean on the faces.
MinimalControl minimal_control(const DensityField& m, const Potential& pot, double tolerance = 1e-6);

struct RateDecomposition {
  double initial_cost;
  ControlGrid minimal_control;
  double dynamic_cost;
  /// +infinity when infeasible.
  double total;
  bool feasible;
};

RateDecomposition rate(const DensityField& m, const Potential& pot, double tolerance = 1e-6);

/// L2 norm of the zero-mean periodic antiderivative of g, computed from its
/// discrete Fourier coefficients. Throws NotMeanZero when |mean g| exceeds
/// tolerance * (1 + max |g|).
double h_minus_one_seminorm(std::span<const double> g, double tolerance = 1e-8);

/// 1/2 sum_k dt |g(t_k, .)|_{-1}^2, the dual form of the dynamic cost.
double dual_dynamic_cost(const DensityField& m, const Potential& pot);

}  // namespace gllab
