#pragma once

// N charges on the periodic lattice {1/N, ..., (N-1)/N, 1}. Site k (0-based)
// carries X_{k+1}; indices wrap modulo N. Each step draws Z increments
//   dZ_i = (N^2 / 2) [phi'(X_{i-1}) - phi'(X_i)] dt + N dB_i
// and sets X_i += dZ_i - dZ_{i+1}, so the total charge telescopes away.
// The controlled variant replaces dB_i by dB_i + psi_i dt.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gllab/potential.hpp"
#include "gllab/rng.hpp"

namespace gllab {

struct LatticeState {
  double time = 0.0;
  std::vector<double> charges;

  std::size_t n_sites() const { return charges.size(); }
  double total_charge() const;
};

enum class Scheme { euler_maruyama };

/// 0.1 / max|phi''| over the bulk of Phi.
double default_stability_constant(const Potential& pot);

struct SimConfig {
  std::size_t n_sites = 32;
  double horizon = 1.0;
  /// Zero selects the largest stable step, stability_constant / N^2.
  double dt = 0.0;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::euler_maruyama;
  /// Zero selects default_stability_constant(pot).
  double stability_constant = 0.0;

  double resolved_stability_constant(const Potential& pot) const;
  /// Validated step: throws InvalidInput unless 0 < dt <= c / N^2.
  double resolved_dt(const Potential& pot) const;
  void validate(const Potential& pot) const;
};

/// psi_i(t) = U[j][i] on (t_j, t_{j+1}], with max |U| <= bound.
class SimpleControl {
 public:
  /// `values` is row-major, one row of n_sites entries per piece. A bound of
  /// zero means "use max |U|".
  SimpleControl(std::vector<double> breakpoints, std::size_t n_sites, std::vector<double> values,
                double bound = 0.0);

  static SimpleControl zero(std::size_t n_sites, double horizon);
  static SimpleControl constant(std::size_t n_sites, double horizon, double value);

  std::size_t pieces() const { return breakpoints_.size() - 1; }
  std::size_t n_sites() const { return n_sites_; }
  double horizon() const { return breakpoints_.back(); }
  double bound() const { return bound_; }
  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> piece(std::size_t j) const;
  double value(std::size_t j, std::size_t site) const { return values_[j * n_sites_ + site]; }

  /// Piece j with t in (t_j, t_{j+1}]; t <= 0 maps to the first piece.
  std::size_t piece_at(double t) const;

  /// 1/2 sum_i int_0^T psi_i(s)^2 ds.
  double quadratic_cost() const;

 private:
  std::vector<double> breakpoints_;
  std::size_t n_sites_;
  std::vector<double> values_;
  double bound_;
};

struct TrajectoryRecord {
  std::size_t n_sites = 0;
  std::vector<double> sample_times;
  std::vector<double> states;  // row-major, one row per sample time
  std::vector<double> log_weight_at_samples;
  std::vector<double> cost_at_samples;
  /// log(dP/dPbar) along the path; zero for uncontrolled runs.
  double girsanov_log_weight = 0.0;
  /// 1/2 sum_i int |psi_i|^2 ds.
  double control_cost = 0.0;

  std::span<const double> state(std::size_t sample) const {
    return std::span<const double>(states).subspan(sample * n_sites, n_sites);
  }
};

struct StepIncrements {
  double log_weight = 0.0;
  double cost = 0.0;
};

/// Reusable Euler-Maruyama stepper; owns its scratch buffers.
class LatticeStepper {
 public:
  LatticeStepper(Potential pot, std::size_t n_sites, double dt);

  void step(LatticeState& state, Rng& rng);
  StepIncrements step(LatticeState& state, std::span<const double> control, Rng& rng);

  double dt() const { return dt_; }
  /// Drops the cached second normal variate so a fresh stream starts clean.
  void reset() { normal_.reset(); }

 private:
  void draw_noise(Rng& rng);
  void advance(LatticeState& state, const double* control);

  Potential pot_;
  std::size_t n_;
  double dt_;
  std::normal_distribution<double> normal_;
  std::vector<double> force_, noise_, dz_;
};

LatticeState step_uncontrolled(const Potential& pot, const LatticeState& state, double dt, Rng& rng);

struct ControlledStep {
  LatticeState state;
  double log_weight_increment;
  double cost_increment;
};

ControlledStep step_controlled(const Potential& pot, const LatticeState& state,
                               std::span<const double> control_values, double dt, Rng& rng);

/// Advances `initial` to config.horizon, recording states at `sample_times`
/// (snapped to the nearest step). `control` may be null. The generator is
/// make_stream(config.seed, 0).
TrajectoryRecord simulate_trajectory(const Potential& pot, const SimConfig& config,
                                     const LatticeState& initial, const SimpleControl* control,
                                     std::span<const double> sample_times);

/// Same, drawing from a caller-owned generator.
TrajectoryRecord simulate_trajectory(const Potential& pot, const SimConfig& config,
                                     const LatticeState& initial, const SimpleControl* control,
                                     std::span<const double> sample_times, Rng& rng);

/// n evenly spaced times 0, T/(n-1), ..., T (just {T} when n == 1).
std::vector<double> even_sample_times(double horizon, std::size_t n);

}  // namespace gllab
