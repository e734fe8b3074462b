#include "gllab/particle_system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gllab/errors.hpp"
#include "gllab/kernels.hpp"
#include "gllab/parallel.hpp"

namespace gllab {

double LatticeState::total_charge() const { return pairwise_sum(charges); }

double default_stability_constant(const Potential& pot) {
  const double curvature = pot.max_abs_phi_double_prime();
  return curvature > 0.0 ? 0.1 / curvature : 0.1;
}

double SimConfig::resolved_stability_constant(const Potential& pot) const {
  return stability_constant > 0.0 ? stability_constant : default_stability_constant(pot);
}

double SimConfig::resolved_dt(const Potential& pot) const {
  if (n_sites == 0) throw InvalidInput("n_sites must be positive");
  const double n = static_cast<double>(n_sites);
  const double limit = resolved_stability_constant(pot) / (n * n);
  if (dt == 0.0) return limit;
  if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
  if (dt > limit * (1.0 + 1e-12)) {
    throw InvalidInput("dt=" + std::to_string(dt) + " exceeds the stability bound c/N^2=" +
                       std::to_string(limit));
  }
  return dt;
}

void SimConfig::validate(const Potential& pot) const {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw InvalidInput("horizon must be finite and >= 0");
  resolved_dt(pot);
}

// ---------------------------------------------------------------------------

SimpleControl::SimpleControl(std::vector<double> breakpoints, std::size_t n_sites,
                             std::vector<double> values, double bound)
    : breakpoints_(std::move(breakpoints)), n_sites_(n_sites), values_(std::move(values)), bound_(bound) {
  if (breakpoints_.size() < 2) throw InvalidInput("SimpleControl needs at least one piece");
  if (breakpoints_.front() != 0.0) throw InvalidInput("SimpleControl breakpoints must start at 0");
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()))
    throw InvalidInput("SimpleControl breakpoints must be nondecreasing");
  if (values_.size() != pieces() * n_sites_)
    throw InvalidInput("SimpleControl values must have pieces * n_sites entries");
  double max_abs = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidInput("SimpleControl values must be finite");
    max_abs = std::max(max_abs, std::abs(v));
  }
  if (bound_ == 0.0) bound_ = max_abs;
  if (max_abs > bound_) throw InvalidInput("SimpleControl value exceeds its bound");
}

SimpleControl SimpleControl::zero(std::size_t n_sites, double horizon) {
  return SimpleControl({0.0, horizon}, n_sites, std::vector<double>(n_sites, 0.0));
}

SimpleControl SimpleControl::constant(std::size_t n_sites, double horizon, double value) {
  return SimpleControl({0.0, horizon}, n_sites, std::vector<double>(n_sites, value));
}

std::span<const double> SimpleControl::piece(std::size_t j) const {
  return std::span<const double>(values_).subspan(j * n_sites_, n_sites_);
}

std::size_t SimpleControl::piece_at(double t) const {
  // First breakpoint >= t closes the piece (t_{j}, t_{j+1}].
  const auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), t);
  const auto j = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return std::min(j, pieces() - 1);
}

double SimpleControl::quadratic_cost() const {
  double total = 0.0;
  for (std::size_t j = 0; j < pieces(); ++j) {
    const auto row = piece(j);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    total += 0.5 * (breakpoints_[j + 1] - breakpoints_[j]) * sq;
  }
  return total;
}

// ---------------------------------------------------------------------------

LatticeStepper::LatticeStepper(Potential pot, std::size_t n_sites, double dt)
    : pot_(std::move(pot)), n_(n_sites), dt_(dt), force_(n_sites), noise_(n_sites), dz_(n_sites) {
  if (n_sites == 0) throw InvalidInput("LatticeStepper: n_sites must be positive");
  if (!(dt > 0.0)) throw InvalidInput("LatticeStepper: dt must be positive");
}

void LatticeStepper::draw_noise(Rng& rng) {
  for (double& v : noise_) v = normal_(rng);
}

void LatticeStepper::advance(LatticeState& state, const double* control) {
  if (state.charges.size() != n_) throw InvalidInput("LatticeStepper: state has the wrong number of sites");
  const auto& k = kernels::active();
  const double n = static_cast<double>(n_);
  pot_.phi_prime_batch(state.charges, force_);
  k.flux_increments(force_.data(), noise_.data(), control, 0.5 * n * n * dt_, n * std::sqrt(dt_),
                    n * dt_, dz_.data(), n_);
  k.apply_flux_difference(dz_.data(), state.charges.data(), n_);
  state.time += dt_;
  double probe = 0.0;
  for (double x : state.charges) probe += x;
  if (!std::isfinite(probe)) {
    throw NonFiniteState("lattice state became non-finite at t=" + std::to_string(state.time));
  }
}

void LatticeStepper::step(LatticeState& state, Rng& rng) {
  draw_noise(rng);
  advance(state, nullptr);
}

StepIncrements LatticeStepper::step(LatticeState& state, std::span<const double> control, Rng& rng) {
  if (control.size() != n_) throw InvalidInput("LatticeStepper: control has the wrong number of sites");
  draw_noise(rng);
  const auto& k = kernels::active();
  const double cross = k.dot(control.data(), noise_.data(), n_);
  const double sq = k.dot(control.data(), control.data(), n_);
  advance(state, control.data());
  return {-std::sqrt(dt_) * cross - 0.5 * dt_ * sq, 0.5 * dt_ * sq};
}

LatticeState step_uncontrolled(const Potential& pot, const LatticeState& state, double dt, Rng& rng) {
  LatticeStepper stepper(pot, state.n_sites(), dt);
  LatticeState next = state;
  stepper.step(next, rng);
  return next;
}

ControlledStep step_controlled(const Potential& pot, const LatticeState& state,
                               std::span<const double> control_values, double dt, Rng& rng) {
  LatticeStepper stepper(pot, state.n_sites(), dt);
  ControlledStep out{state, 0.0, 0.0};
  const StepIncrements inc = stepper.step(out.state, control_values, rng);
  out.log_weight_increment = inc.log_weight;
  out.cost_increment = inc.cost;
  return out;
}

std::vector<double> even_sample_times(double horizon, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {horizon};
  std::vector<double> t(n);
  for (std::size_t s = 0; s < n; ++s) t[s] = horizon * static_cast<double>(s) / static_cast<double>(n - 1);
  t.back() = horizon;
  return t;
}

TrajectoryRecord simulate_trajectory(const Potential& pot, const SimConfig& config,
                                     const LatticeState& initial, const SimpleControl* control,
                                     std::span<const double> sample_times) {
  Rng rng = make_stream(config.seed, 0);
  return simulate_trajectory(pot, config, initial, control, sample_times, rng);
}

TrajectoryRecord simulate_trajectory(const Potential& pot, const SimConfig& config,
                                     const LatticeState& initial, const SimpleControl* control,
                                     std::span<const double> sample_times, Rng& rng) {
  const std::size_t n = config.n_sites;
  if (initial.n_sites() != n) throw InvalidInput("simulate_trajectory: initial state size differs from n_sites");
  config.validate(pot);
  if (!std::is_sorted(sample_times.begin(), sample_times.end()))
    throw InvalidInput("simulate_trajectory: sample_times must be sorted");
  for (double t : sample_times) {
    if (t < 0.0 || t > config.horizon) throw InvalidInput("simulate_trajectory: sample time outside [0, T]");
  }
  if (control) {
    if (control->n_sites() != n) throw InvalidInput("simulate_trajectory: control size differs from n_sites");
    if (std::abs(control->horizon() - config.horizon) > 1e-12 * (1.0 + config.horizon))
      throw InvalidInput("simulate_trajectory: control horizon differs from T");
  }

  const double max_dt = config.resolved_dt(pot);
  const std::size_t steps =
      config.horizon == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(config.horizon / max_dt - 1e-9));
  const double dt = steps == 0 ? max_dt : config.horizon / static_cast<double>(steps);

  TrajectoryRecord rec;
  rec.n_sites = n;
  rec.sample_times.assign(sample_times.begin(), sample_times.end());
  rec.states.reserve(sample_times.size() * n);

  std::vector<std::size_t> snap(sample_times.size());
  for (std::size_t s = 0; s < snap.size(); ++s) {
    snap[s] = steps == 0 ? 0 : std::min<std::size_t>(static_cast<std::size_t>(std::llround(sample_times[s] / dt)), steps);
  }

  LatticeState state = initial;
  state.time = 0.0;
  LatticeStepper stepper(pot, n, dt);
  stepper.reset();
  std::size_t next_sample = 0;
  auto record_due = [&](std::size_t step_index) {
    while (next_sample < snap.size() && snap[next_sample] == step_index) {
      rec.states.insert(rec.states.end(), state.charges.begin(), state.charges.end());
      rec.log_weight_at_samples.push_back(rec.girsanov_log_weight);
      rec.cost_at_samples.push_back(rec.control_cost);
      ++next_sample;
    }
  };

  record_due(0);
  for (std::size_t step = 0; step < steps; ++step) {
    if (control) {
      const double t_mid = (static_cast<double>(step) + 0.5) * dt;
      const StepIncrements inc = stepper.step(state, control->piece(control->piece_at(t_mid)), rng);
      rec.girsanov_log_weight += inc.log_weight;
      rec.control_cost += inc.cost;
    } else {
      stepper.step(state, rng);
    }
    record_due(step + 1);
  }
  return rec;
}

}  // namespace gllab
