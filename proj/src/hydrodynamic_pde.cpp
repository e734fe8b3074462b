#include "gllab/hydrodynamic_pde.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include "gllab/errors.hpp"
#include "gllab/parallel.hpp"
#include "hprime_table.hpp"

using gllab::detail::HPrimeTable;

namespace gllab {

double DensityField::time(std::size_t k) const {
  return k == n_steps ? horizon : horizon * static_cast<double>(k) / static_cast<double>(n_steps);
}

double DensityField::mass(std::size_t k) const { return pairwise_sum(level(k)) * dtheta(); }

// ---------------------------------------------------------------------------

ControlGrid::ControlGrid(std::size_t n_steps, std::size_t n_theta, double horizon, std::vector<double> values,
                         FaceRule rule)
    : n_steps_(n_steps), n_theta_(n_theta), horizon_(horizon), values_(std::move(values)), rule_(rule) {
  if (n_steps == 0 || n_theta == 0) throw InvalidInput("ControlGrid: empty grid");
  if (!(horizon > 0.0)) throw InvalidInput("ControlGrid: horizon must be positive");
  if (values_.size() != n_steps * n_theta) throw InvalidInput("ControlGrid: values must have K * J entries");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidInput("ControlGrid: values must be finite");
  }
  l2_norm_sq_ = recompute_l2_norm_sq();
}

ControlGrid ControlGrid::zero(std::size_t n_steps, std::size_t n_theta, double horizon) {
  return ControlGrid(n_steps, n_theta, horizon, std::vector<double>(n_steps * n_theta, 0.0));
}

ControlGrid ControlGrid::from_function(std::size_t n_steps, std::size_t n_theta, double horizon,
                                       const std::function<double(double, double)>& u, FaceRule rule) {
  std::vector<double> v(n_steps * n_theta);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = horizon * static_cast<double>(k) / static_cast<double>(n_steps);
    for (std::size_t j = 0; j < n_theta; ++j) v[k * n_theta + j] = u(t, static_cast<double>(j) / static_cast<double>(n_theta));
  }
  return ControlGrid(n_steps, n_theta, horizon, std::move(v), rule);
}

double ControlGrid::face_value(std::size_t k, std::size_t j) const {
  const auto u = level(k);
  if (rule_ == FaceRule::left) return u[j];
  return 0.5 * (u[j] + u[(j + 1) % n_theta_]);
}

double ControlGrid::recompute_l2_norm_sq() const {
  const double cell = horizon_ / static_cast<double>(n_steps_) / static_cast<double>(n_theta_);
  std::vector<double> sq(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) sq[i] = values_[i] * values_[i];
  return pairwise_sum(sq) * cell;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<double, double> minmax_of(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

void check_cfl(double dt, double dtheta, double max_h_second, double safety) {
  const double limit = safety * dtheta * dtheta / max_h_second;
  if (dt > limit) {
    throw CFLViolation("pde step " + std::to_string(dt) + " exceeds the stable limit " + std::to_string(limit));
  }
}

}  // namespace

std::size_t stable_step_count(std::span<const double> m0, const Potential& pot, double horizon, double cfl_safety) {
  if (m0.empty()) throw InvalidInput("stable_step_count: empty initial field");
  const auto [lo, hi] = minmax_of(m0);
  const HPrimeTable hp(pot, lo, hi, 257);
  const double dtheta = 1.0 / static_cast<double>(m0.size());
  const double limit = cfl_safety * dtheta * dtheta / hp.max_h_second();
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon / limit)));
}

DensityField solve_controlled_pde(std::span<const double> m0, const ControlGrid& u, const Potential& pot,
                                  double horizon, const PdeOptions& options) {
  const std::size_t n = m0.size();
  if (n < 3) throw InvalidInput("solve_controlled_pde: need at least 3 cells");
  if (u.n_theta() != n) throw InvalidInput("solve_controlled_pde: control grid has a different J");
  if (std::abs(u.horizon() - horizon) > 1e-12 * (1.0 + horizon))
    throw InvalidInput("solve_controlled_pde: control horizon differs from T");
  for (double v : m0) {
    if (!std::isfinite(v)) throw NonFiniteField("solve_controlled_pde: initial field is not finite");
  }

  DensityField field;
  field.n_theta = n;
  field.n_steps = u.n_steps();
  field.horizon = horizon;
  field.values.resize((field.n_steps + 1) * n);
  std::copy(m0.begin(), m0.end(), field.level(0).begin());

  const double dtheta = field.dtheta();
  const double dt = field.dt();
  const auto [lo, hi] = minmax_of(m0);
  HPrimeTable hp(pot, lo, hi, options.table_nodes);
  check_cfl(dt, dtheta, hp.max_h_second(), options.cfl_safety);

  bool zero_control = true;
  for (double v : u.values()) zero_control = zero_control && v == 0.0;

  const auto& kern = kernels::active();
  std::vector<double> hprime(n);
  const double diffusion = 0.5 * dt / (dtheta * dtheta);
  const double advection = dt / dtheta;
  for (std::size_t k = 0; k < field.n_steps; ++k) {
    const auto cur = field.level(k);
    const auto [clo, chi] = minmax_of(cur);
    if (hp.cover(clo, chi)) check_cfl(dt, dtheta, hp.max_h_second(), options.cfl_safety);
    for (std::size_t j = 0; j < n; ++j) hprime[j] = hp(cur[j]);
    const auto next = field.level(k + 1);
    kern.conservative_update(cur.data(), hprime.data(), zero_control ? nullptr : u.level(k).data(), diffusion,
                             advection, u.face_rule(), next.data(), n);
    for (double v : next) {
      if (!std::isfinite(v)) {
        throw NonFiniteField("pde field became non-finite at t=" + std::to_string(field.time(k + 1)));
      }
    }
  }
  field.range_escaped = hp.escaped();
  if (field.range_escaped) {
    std::cerr << "warning: pde field left the achievable mean range; h' was clamped\n";
  }
  return field;
}

DensityField solve_pde(std::span<const double> m0, const Potential& pot, double horizon, std::size_t n_steps,
                       const PdeOptions& options) {
  if (n_steps == 0) n_steps = stable_step_count(m0, pot, horizon, options.cfl_safety);
  return solve_controlled_pde(m0, ControlGrid::zero(n_steps, m0.size(), horizon), pot, horizon, options);
}

double weak_form_residual(const DensityField& m, const ControlGrid& u, const Potential& pot,
                          const SmoothCircleFunction& test_fn, std::size_t level) {
  if (level > m.n_steps) throw InvalidInput("weak_form_residual: level beyond the time grid");
  if (u.n_steps() != m.n_steps || u.n_theta() != m.n_theta)
    throw InvalidInput("weak_form_residual: control grid does not match the field");
  const std::size_t n = m.n_theta;
  const double dtheta = m.dtheta();
  const double dt = m.dt();

  auto pairing = [&](std::size_t k) {
    const auto v = m.level(k);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += test_fn.f(m.theta(j)) * v[j];
    return s * dtheta;
  };

  double lo = m.values.front(), hi = lo;
  for (double v : m.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  HPrimeTable hp(pot, lo, hi, 513);
  hp.cover(lo, hi);

  double diffusion = 0.0, transport = 0.0;
  for (std::size_t k = 0; k < level; ++k) {
    const auto v = m.level(k);
    double d = 0.0, a = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      d += test_fn.d2(m.theta(j)) * hp(v[j]);
      a += test_fn.d1(m.theta(j) + 0.5 * dtheta) * u.face_value(k, j);
    }
    diffusion += d * dtheta * dt;
    transport += a * dtheta * dt;
  }
  return std::abs(pairing(level) - pairing(0) - 0.5 * diffusion - transport);
}

std::vector<double> sample_on_grid(const std::function<double(double)>& f, std::size_t n_theta) {
  std::vector<double> v(n_theta);
  for (std::size_t j = 0; j < n_theta; ++j) v[j] = f(static_cast<double>(j) / static_cast<double>(n_theta));
  return v;
}

std::size_t nearest_level(const DensityField& field, double t) {
  const double s = t / field.dt();
  return std::min<std::size_t>(static_cast<std::size_t>(std::llround(std::max(s, 0.0))), field.n_steps);
}

MeasurePath field_path_at_times(const DensityField& field, std::size_t n_atoms, std::span<const double> times) {
  MeasurePath p;
  p.sample_times.assign(times.begin(), times.end());
  for (double t : times) p.measures.push_back(density_to_atoms(field.level(nearest_level(field, t)), n_atoms));
  return p;
}

MeasurePath field_path(const DensityField& field, std::size_t n_atoms, std::size_t n_snapshots) {
  const auto times = even_sample_times(field.horizon, n_snapshots);
  return field_path_at_times(field, n_atoms, times);
}

ContractionGap contraction_gap(std::span<const double> m0, const ControlGrid& u1, const ControlGrid& u2,
                               const Potential& pot, double horizon, const ContractionOptions& options) {
  if (u1.n_steps() != u2.n_steps() || u1.n_theta() != u2.n_theta())
    throw InvalidInput("contraction_gap: control grids differ in shape");
  const DensityField f1 = solve_controlled_pde(m0, u1, pot, horizon, options.pde);
  const DensityField f2 = solve_controlled_pde(m0, u2, pot, horizon, options.pde);
  const double lhs = d_star(field_path(f1, options.n_atoms, options.n_snapshots),
                            field_path(f2, options.n_atoms, options.n_snapshots), std::max<std::size_t>(256, options.n_atoms));
  std::vector<double> diff(u1.values().size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u1.values()[i] - u2.values()[i];
  const ControlGrid d(u1.n_steps(), u1.n_theta(), horizon, std::move(diff));
  return {lhs, std::exp(0.5 * horizon) * std::sqrt(d.l2_norm_sq())};
}

ControlGrid minimal_control_embedding(const SimpleControl& control, std::size_t n_steps, std::size_t n_theta) {
  if (n_steps == 0 || n_theta == 0) throw InvalidInput("minimal_control_embedding: empty grid");
  const double horizon = control.horizon();
  const std::size_t n = control.n_sites();
  const auto bp = control.breakpoints();
  std::vector<double> values(n_steps * n_theta, 0.0);
  std::vector<double> avg(n);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double a = horizon * static_cast<double>(k) / static_cast<double>(n_steps);
    const double b = horizon * static_cast<double>(k + 1) / static_cast<double>(n_steps);
    std::fill(avg.begin(), avg.end(), 0.0);
    for (std::size_t p = 0; p < control.pieces(); ++p) {
      const double overlap = std::min(b, bp[p + 1]) - std::max(a, bp[p]);
      if (overlap <= 0.0) continue;
      const auto row = control.piece(p);
      for (std::size_t i = 0; i < n; ++i) avg[i] += overlap * row[i];
    }
    for (std::size_t j = 0; j < n_theta; ++j) {
      // Cell ((i-1)/N, i/N] holding the face at (j + 1/2)/J.
      const double face = (static_cast<double>(j) + 0.5) / static_cast<double>(n_theta);
      const auto i = static_cast<std::size_t>(std::ceil(face * static_cast<double>(n)));
      values[k * n_theta + j] = avg[std::clamp<std::size_t>(i, 1, n) - 1] / (b - a);
    }
  }
  return ControlGrid(n_steps, n_theta, horizon, std::move(values), FaceRule::left);
}

}  // namespace gllab
