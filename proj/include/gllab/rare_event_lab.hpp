#pragma once

// Desk-scale Laplace-principle experiments: plain Monte Carlo of
// -(1/N) log E exp(-N F(mu^N)), Girsanov-reweighted estimates, and the
// variational upper bound attained by a (control, profile) pair.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gllab/empirical_measure.hpp"
#include "gllab/hydrodynamic_pde.hpp"
#include "gllab/particle_system.hpp"
#include "gllab/potential.hpp"
#include "gllab/profile.hpp"

namespace gllab {

class Functional {
 public:
  enum class Kind { pairing_at_T, sup_pairing, custom };
  using CircleFn = std::function<double(double)>;

  /// transform(<mu(T), J>), clamped to [-bound, bound].
  static Functional pairing_at_T(CircleFn test_function, CircleFn transform, double bound);
  /// transform(max over snapshots of |<mu(t), J>|), clamped.
  static Functional sup_pairing(CircleFn test_function, CircleFn transform, double bound,
                                std::size_t n_snapshots = 11);
  static Functional custom(std::function<double(const MeasurePath&)> fn, double bound,
                           std::size_t n_snapshots = 1);
  static Functional constant(double c);
  /// min(kappa (<mu(T), J> - target)^2, cap).
  static Functional quadratic_pairing(CircleFn test_function, double kappa, double target, double cap);

  Kind kind() const { return kind_; }
  double bound() const { return bound_; }
  const CircleFn& test_function() const { return test_function_; }
  const CircleFn& transform() const { return transform_; }

  /// Snapshot times the functional reads on [0, T].
  std::vector<double> sample_times(double horizon) const;
  double operator()(const MeasurePath& path) const;

 private:
  Functional(Kind kind, CircleFn j, CircleFn transform, std::function<double(const MeasurePath&)> fn, double bound,
             std::size_t n_snapshots);

  Kind kind_;
  CircleFn test_function_;
  CircleFn transform_;
  std::function<double(const MeasurePath&)> custom_;
  double bound_;
  std::size_t n_snapshots_;
};

struct ExperimentReport {
  std::string method;  // plain_mc | importance_sampling | variational_bound
  std::size_t n_sites = 0;
  std::size_t replicas = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double wall_time = 0.0;
  std::uint64_t seed = 0;
  /// The unshifted mean of exp(-N F) underflowed; the estimate is the
  /// log-sum-exp form.
  bool underflow = false;
};

struct LabConfig {
  SimConfig sim;  // n_sites, horizon, dt, seed
  std::size_t replicas = 1000;
  std::size_t workers = 1;
};

ExperimentReport laplace_functional_mc(const Functional& f, const Potential& pot, const LabConfig& config,
                                       const ProfileMeasure& initial);

/// Estimates E[G(mu^N)] from controlled paths weighted by exp(log-weight).
/// A null control gives plain Monte Carlo with the same random numbers.
ExperimentReport importance_sampled_expectation(const Functional& g, const SimpleControl* control,
                                                const Potential& pot, const LabConfig& config,
                                                const ProfileMeasure& initial);

/// entropy_cost_of_profile + mean(control_cost / N) + mean(F) under the
/// controlled law.
ExperimentReport variational_upper_bound(const SimpleControl& control, const ProfileMeasure& initial,
                                         const Functional& f, const Potential& pot, const LabConfig& config);

/// psi_i = u(jT/N, i/N) on (jT/N, (j+1)T/N], j = 0..N-1.
SimpleControl discretize_control(const ControlGrid& u, std::size_t n_sites);

/// u at (t, theta): the time cell holding t, periodic linear interpolation
/// between the points where the grid values act (faces for the left rule,
/// nodes otherwise).
double evaluate_control(const ControlGrid& u, double t, double theta);

/// Scaled copies s * (m0, u) of a base path, solved forward by the PDE.
struct PathFamily {
  std::function<double(double)> m0;
  std::function<double(double, double)> u;
  std::vector<double> scales;
  std::size_t n_theta = 64;
};

/// Base shape for F = quadratic pairing with J = sin 2 pi theta: the
/// cheapest way to move <m(T), J> for the linearized equation around 0.
PathFamily sine_pairing_family(const Potential& pot, double horizon, std::vector<double> scales,
                               std::size_t n_theta = 64);

struct FamilyMember {
  double scale;
  DensityField field;
  ControlGrid u_star;
  double rate;
  double functional;
};

/// Solves each member, evaluates I by the rate decomposition and F on the
/// PDE path (atoms at the grid nodes).
std::vector<FamilyMember> evaluate_family(const PathFamily& family, const Functional& f, const Potential& pot,
                                          double horizon);

struct TrendRow {
  std::size_t n_sites;
  double laplace;
  double laplace_se;
  double best_variational;
  double best_se;
  double best_scale;
  double inf_f_plus_i;
};

struct TrendOptions {
  std::size_t replicas = 10000;
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  double dt_constant = 0.0;  // stability constant; 0 selects the default
};

std::vector<TrendRow> ldp_trend_study(const Functional& f, const std::vector<std::size_t>& n_list,
                                      const Potential& pot, double horizon, const ProfileMeasure& initial,
                                      const PathFamily& control_family, const PathFamily& path_family,
                                      const TrendOptions& options);

}  // namespace gllab
