#pragma once

// Explicit finite-volume solver for the controlled hydrodynamic equation
//   m_t = 1/2 [h'(m)]_thetatheta - u_theta
// on the circle, with grid nodes theta_j = j/J and time levels t_k = kT/K.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gllab/empirical_measure.hpp"
#include "gllab/kernels.hpp"
#include "gllab/particle_system.hpp"
#include "gllab/potential.hpp"

namespace gllab {

using kernels::FaceRule;

struct DensityField {
  std::size_t n_theta = 0;
  std::size_t n_steps = 0;  // K; there are K + 1 stored levels
  double horizon = 0.0;
  std::vector<double> values;
  /// Set when h' had to be clamped at the edge of the achievable means.
  bool range_escaped = false;

  double dtheta() const { return 1.0 / static_cast<double>(n_theta); }
  double dt() const { return horizon / static_cast<double>(n_steps); }
  double time(std::size_t k) const;
  double theta(std::size_t j) const { return static_cast<double>(j) * dtheta(); }
  std::span<const double> level(std::size_t k) const {
    return std::span<const double>(values).subspan(k * n_theta, n_theta);
  }
  std::span<double> level(std::size_t k) { return std::span<double>(values).subspan(k * n_theta, n_theta); }
  double mass(std::size_t k) const;
};

/// u on K time cells [t_k, t_{k+1}) by J nodes.
class ControlGrid {
 public:
  ControlGrid(std::size_t n_steps, std::size_t n_theta, double horizon, std::vector<double> values,
              FaceRule rule = FaceRule::average);

  static ControlGrid zero(std::size_t n_steps, std::size_t n_theta, double horizon);
  /// u(t_k, theta_j) sampled at the left time level.
  static ControlGrid from_function(std::size_t n_steps, std::size_t n_theta, double horizon,
                                   const std::function<double(double, double)>& u,
                                   FaceRule rule = FaceRule::average);

  std::size_t n_steps() const { return n_steps_; }
  std::size_t n_theta() const { return n_theta_; }
  double horizon() const { return horizon_; }
  FaceRule face_rule() const { return rule_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> level(std::size_t k) const {
    return std::span<const double>(values_).subspan(k * n_theta_, n_theta_);
  }
  /// Flux through face j+1/2 during step k.
  double face_value(std::size_t k, std::size_t j) const;
  /// sum_k sum_j u^2 dtheta dt, cached at construction.
  double l2_norm_sq() const { return l2_norm_sq_; }
  double recompute_l2_norm_sq() const;

 private:
  std::size_t n_steps_;
  std::size_t n_theta_;
  double horizon_;
  std::vector<double> values_;
  FaceRule rule_;
  double l2_norm_sq_;
};

struct PdeOptions {
  double cfl_safety = 0.9;
  std::size_t table_nodes = 513;
};

/// Smallest step count K with T/K <= safety * dtheta^2 / max h'' over the
/// range of m0 (plus padding).
std::size_t stable_step_count(std::span<const double> m0, const Potential& pot, double horizon,
                              double cfl_safety = 0.9);

/// The step count comes from `u`; J must equal m0.size().
DensityField solve_controlled_pde(std::span<const double> m0, const ControlGrid& u, const Potential& pot,
                                  double horizon, const PdeOptions& options = {});

/// Uncontrolled solve with K steps (0 selects stable_step_count).
DensityField solve_pde(std::span<const double> m0, const Potential& pot, double horizon, std::size_t n_steps = 0,
                       const PdeOptions& options = {});

struct SmoothCircleFunction {
  std::function<double(double)> f, d1, d2;
};

/// |<m(t_k), J> - <m(0), J> - 1/2 int int J'' h'(m) - int int J' u| by
/// left-point sums in time and grid sums in space.
double weak_form_residual(const DensityField& m, const ControlGrid& u, const Potential& pot,
                          const SmoothCircleFunction& test_fn, std::size_t level);

/// m0 evaluated at the grid nodes j/J.
std::vector<double> sample_on_grid(const std::function<double(double)>& f, std::size_t n_theta);

/// Snapshots at `n_snapshots` evenly spaced levels, embedded as n_atoms atoms.
MeasurePath field_path(const DensityField& field, std::size_t n_atoms, std::size_t n_snapshots);
/// Snapshots at the levels nearest to `times`.
MeasurePath field_path_at_times(const DensityField& field, std::size_t n_atoms, std::span<const double> times);
std::size_t nearest_level(const DensityField& field, double t);

struct ContractionOptions {
  std::size_t n_atoms = 64;
  std::size_t n_snapshots = 21;
  PdeOptions pde{};
};

struct ContractionGap {
  double lhs;  ///< d_* between the two solutions
  double rhs;  ///< e^{T/2} ||u1 - u2||_2
};

ContractionGap contraction_gap(std::span<const double> m0, const ControlGrid& u1, const ControlGrid& u2,
                               const Potential& pot, double horizon, const ContractionOptions& options = {});

/// Piecewise-constant u_N = psi_i(t) on ((i-1)/N, i/N]: each face takes the
/// value of the cell containing it, averaged over each time step.
ControlGrid minimal_control_embedding(const SimpleControl& control, std::size_t n_steps, std::size_t n_theta);

}  // namespace gllab
