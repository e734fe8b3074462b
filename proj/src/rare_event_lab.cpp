#include "gllab/rare_event_lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "gllab/errors.hpp"
#include "gllab/parallel.hpp"
#include "gllab/rate_function.hpp"

namespace gllab {

Functional::Functional(Kind kind, CircleFn j, CircleFn transform, std::function<double(const MeasurePath&)> fn,
                       double bound, std::size_t n_snapshots)
    : kind_(kind),
      test_function_(std::move(j)),
      transform_(std::move(transform)),
      custom_(std::move(fn)),
      bound_(bound),
      n_snapshots_(n_snapshots) {
  if (!std::isfinite(bound) || bound < 0.0) throw InvalidInput("Functional: bound must be finite and >= 0");
  if (n_snapshots == 0) throw InvalidInput("Functional: needs at least one snapshot");
}

Functional Functional::pairing_at_T(CircleFn test_function, CircleFn transform, double bound) {
  return Functional(Kind::pairing_at_T, std::move(test_function), std::move(transform), {}, bound, 1);
}

Functional Functional::sup_pairing(CircleFn test_function, CircleFn transform, double bound,
                                   std::size_t n_snapshots) {
  return Functional(Kind::sup_pairing, std::move(test_function), std::move(transform), {}, bound, n_snapshots);
}

Functional Functional::custom(std::function<double(const MeasurePath&)> fn, double bound, std::size_t n_snapshots) {
  return Functional(Kind::custom, {}, {}, std::move(fn), bound, n_snapshots);
}

Functional Functional::constant(double c) {
  return custom([c](const MeasurePath&) { return c; }, std::abs(c));
}

Functional Functional::quadratic_pairing(CircleFn test_function, double kappa, double target, double cap) {
  if (!(cap > 0.0)) throw InvalidInput("quadratic_pairing: cap must be positive");
  return pairing_at_T(
      std::move(test_function),
      [kappa, target, cap](double p) { return std::min(kappa * (p - target) * (p - target), cap); }, cap);
}

std::vector<double> Functional::sample_times(double horizon) const {
  if (kind_ == Kind::pairing_at_T) return {horizon};
  return even_sample_times(horizon, n_snapshots_);
}

double Functional::operator()(const MeasurePath& path) const {
  double v = 0.0;
  switch (kind_) {
    case Kind::pairing_at_T:
      if (path.measures.empty()) throw InvalidInput("Functional: empty path");
      v = transform_(pair(path.measures.back(), test_function_));
      break;
    case Kind::sup_pairing: {
      double best = 0.0;
      for (const auto& m : path.measures) best = std::max(best, std::abs(pair(m, test_function_)));
      v = transform_(best);
      break;
    }
    case Kind::custom:
      v = custom_(path);
      break;
  }
  if (std::isnan(v)) throw DegenerateEstimate("Functional evaluated to NaN");
  return std::clamp(v, -bound_, bound_);
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_and_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = pairwise_sum(v) / n;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  const double var = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

void check_replicas(const LabConfig& config) {
  if (config.replicas < 2) throw InvalidInput("experiments need at least 2 replicas");
}

struct Sample {
  double value = 0.0;
  double log_weight = 0.0;
  double cost = 0.0;
};

Sample run_one(const Functional& f, const SimpleControl* control, const Potential& pot, const LabConfig& config,
               const ProfileMeasure& initial, std::size_t replica) {
  Rng rng = make_stream(config.sim.seed, replica);
  const LatticeState x0 = sample_initial_from_profile(initial, config.sim.n_sites, rng);
  const auto times = f.sample_times(config.sim.horizon);
  const TrajectoryRecord rec = simulate_trajectory(pot, config.sim, x0, control, times, rng);
  return {f(path_from_trajectory(rec)), rec.girsanov_log_weight, rec.control_cost};
}

}  // namespace

ExperimentReport laplace_functional_mc(const Functional& f, const Potential& pot, const LabConfig& config,
                                       const ProfileMeasure& initial) {
  check_replicas(config);
  const auto start = Clock::now();
  const auto samples = run_replicas(config.replicas, config.workers, [&](std::size_t r) {
    return run_one(f, nullptr, pot, config, initial, r).value;
  });
  const double n = static_cast<double>(config.sim.n_sites);
  for (double v : samples) {
    if (!std::isfinite(v)) throw DegenerateEstimate("laplace_functional_mc: non-finite functional value");
  }
  // Shift by the smallest value so the largest weight is exactly 1.
  const double vmin = *std::min_element(samples.begin(), samples.end());
  std::vector<double> w(samples.size());
  bool underflow = true;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    w[r] = std::exp(-n * (samples[r] - vmin));
    if (std::exp(-n * samples[r]) > 0.0) underflow = false;
  }
  const MeanSe ms = mean_and_se(w);
  if (!(ms.mean > 0.0) || !std::isfinite(ms.mean))
    throw DegenerateEstimate("laplace_functional_mc: weights degenerate");
  ExperimentReport rep;
  rep.method = "plain_mc";
  rep.n_sites = config.sim.n_sites;
  rep.replicas = config.replicas;
  rep.estimate = vmin - std::log(ms.mean) / n;
  rep.std_error = ms.se / (ms.mean * n);
  // Jensen on the empirical law: the estimate never exceeds the plain mean of F.
  const double plain = pairwise_sum(samples) / static_cast<double>(samples.size());
  if (rep.estimate > plain + 1e-12 * (1.0 + std::abs(plain)))
    throw DegenerateEstimate("laplace_functional_mc: estimate exceeds the mean of F");
  rep.seed = config.sim.seed;
  rep.underflow = underflow;
  rep.wall_time = seconds_since(start);
  return rep;
}

ExperimentReport importance_sampled_expectation(const Functional& g, const SimpleControl* control,
                                                const Potential& pot, const LabConfig& config,
                                                const ProfileMeasure& initial) {
  check_replicas(config);
  const auto start = Clock::now();
  const auto samples = run_replicas(config.replicas, config.workers, [&](std::size_t r) {
    const Sample s = run_one(g, control, pot, config, initial, r);
    return s.value * std::exp(s.log_weight);
  });
  for (double v : samples) {
    if (!std::isfinite(v)) throw DegenerateEstimate("importance_sampled_expectation: non-finite weighted value");
  }
  const MeanSe ms = mean_and_se(samples);
  ExperimentReport rep;
  rep.method = control ? "importance_sampling" : "plain_mc";
  rep.n_sites = config.sim.n_sites;
  rep.replicas = config.replicas;
  rep.estimate = ms.mean;
  rep.std_error = ms.se;
  rep.seed = config.sim.seed;
  rep.wall_time = seconds_since(start);
  return rep;
}

ExperimentReport variational_upper_bound(const SimpleControl& control, const ProfileMeasure& initial,
                                         const Functional& f, const Potential& pot, const LabConfig& config) {
  check_replicas(config);
  const auto start = Clock::now();
  const double n = static_cast<double>(config.sim.n_sites);
  const double entropy = entropy_cost_of_profile(initial, config.sim.n_sites);
  const auto samples = run_replicas(config.replicas, config.workers, [&](std::size_t r) {
    const Sample s = run_one(f, &control, pot, config, initial, r);
    return s.cost / n + s.value;
  });
  const MeanSe ms = mean_and_se(samples);
  ExperimentReport rep;
  rep.method = "variational_bound";
  rep.n_sites = config.sim.n_sites;
  rep.replicas = config.replicas;
  rep.estimate = entropy + ms.mean;
  rep.std_error = ms.se;
  rep.seed = config.sim.seed;
  rep.wall_time = seconds_since(start);
  return rep;
}

double evaluate_control(const ControlGrid& u, double t, double theta) {
  const std::size_t kmax = u.n_steps() - 1;
  const double dt = u.horizon() / static_cast<double>(u.n_steps());
  const auto k = std::min(static_cast<std::size_t>(std::max(t, 0.0) / dt), kmax);
  const auto row = u.level(k);
  const std::size_t n = u.n_theta();
  const double offset = u.face_rule() == FaceRule::left ? 0.5 : 0.0;
  double s = theta * static_cast<double>(n) - offset;
  s -= std::floor(s / static_cast<double>(n)) * static_cast<double>(n);
  auto j = static_cast<std::size_t>(s);
  const double frac = s - static_cast<double>(j);
  j %= n;
  return (1.0 - frac) * row[j] + frac * row[(j + 1) % n];
}

SimpleControl discretize_control(const ControlGrid& u, std::size_t n_sites) {
  if (n_sites == 0) throw InvalidInput("discretize_control: n_sites must be positive");
  const double horizon = u.horizon();
  std::vector<double> breakpoints(n_sites + 1);
  for (std::size_t j = 0; j <= n_sites; ++j)
    breakpoints[j] = horizon * static_cast<double>(j) / static_cast<double>(n_sites);
  breakpoints.back() = horizon;
  std::vector<double> values(n_sites * n_sites);
  for (std::size_t j = 0; j < n_sites; ++j) {
    for (std::size_t i = 0; i < n_sites; ++i) {
      values[j * n_sites + i] = evaluate_control(u, breakpoints[j], site_location(i, n_sites));
    }
  }
  return SimpleControl(std::move(breakpoints), n_sites, std::move(values));
}

PathFamily sine_pairing_family(const Potential& pot, double horizon, std::vector<double> scales,
                               std::size_t n_theta) {
  const double variance = pot.tilted_moments(0.0).variance;
  const double k = 2.0 * std::numbers::pi * std::numbers::pi / variance;
  // Time reversal of the relaxation: amplitude 2s e^{-k(T-t)}, pairing s at T, cost s^2 / variance.
  const double amp0 = 2.0 * std::exp(-k * horizon);
  const double flux = 4.0 * std::numbers::pi / variance;
  PathFamily fam;
  fam.m0 = [amp0](double theta) { return amp0 * std::sin(2.0 * std::numbers::pi * theta); };
  fam.u = [k, horizon, flux](double t, double theta) {
    return flux * std::exp(-k * (horizon - t)) * std::cos(2.0 * std::numbers::pi * theta);
  };
  fam.scales = std::move(scales);
  fam.n_theta = n_theta;
  return fam;
}

std::vector<FamilyMember> evaluate_family(const PathFamily& family, const Functional& f, const Potential& pot,
                                          double horizon) {
  const std::size_t j = family.n_theta;
  const auto base_m0 = sample_on_grid(family.m0, j);
  std::vector<FamilyMember> out;
  out.reserve(family.scales.size());
  for (double s : family.scales) {
    std::vector<double> m0(base_m0);
    for (double& v : m0) v *= s;
    const std::size_t steps = stable_step_count(m0, pot, horizon);
    const ControlGrid u = ControlGrid::from_function(
        steps, j, horizon, [&](double t, double theta) { return s * family.u(t, theta); });
    DensityField field = solve_controlled_pde(m0, u, pot, horizon);
    RateDecomposition r = rate(field, pot);
    const double value = f(field_path_at_times(field, j, f.sample_times(horizon)));
    out.push_back({s, std::move(field), std::move(r.minimal_control), r.total, value});
  }
  return out;
}

std::vector<TrendRow> ldp_trend_study(const Functional& f, const std::vector<std::size_t>& n_list,
                                      const Potential& pot, double horizon, const ProfileMeasure& initial,
                                      const PathFamily& control_family, const PathFamily& path_family,
                                      const TrendOptions& options) {
  if (!std::is_sorted(n_list.begin(), n_list.end())) throw InvalidInput("ldp_trend_study: N list must be increasing");

  double inf_value = std::numeric_limits<double>::infinity();
  for (const FamilyMember& m : evaluate_family(path_family, f, pot, horizon)) {
    inf_value = std::min(inf_value, m.rate + m.functional);
  }
  const auto candidates = evaluate_family(control_family, f, pot, horizon);

  std::vector<TrendRow> rows;
  for (std::size_t n : n_list) {
    LabConfig cfg;
    cfg.sim.n_sites = n;
    cfg.sim.horizon = horizon;
    cfg.sim.seed = options.seed;
    cfg.sim.stability_constant = options.dt_constant;
    cfg.replicas = options.replicas;
    cfg.workers = options.workers;
    const ExperimentReport lap = laplace_functional_mc(f, pot, cfg, initial);

    TrendRow row{n, lap.estimate, lap.std_error, std::numeric_limits<double>::infinity(), 0.0, 0.0, inf_value};
    for (const FamilyMember& c : candidates) {
      const SimpleControl psi = discretize_control(c.u_star, n);
      const double s = c.scale;
      const ProfileMeasure prof = tilted_profile(pot, [&control_family, s](double th) { return s * control_family.m0(th); });
      const ExperimentReport b = variational_upper_bound(psi, prof, f, pot, cfg);
      if (b.estimate < row.best_variational) {
        row.best_variational = b.estimate;
        row.best_se = b.std_error;
        row.best_scale = s;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gllab
