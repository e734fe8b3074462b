#include "gllab/rate_function.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>
#include <vector>

#include "gllab/errors.hpp"
#include "gllab/parallel.hpp"
#include "hprime_table.hpp"

namespace gllab {

namespace {

detail::HPrimeTable table_for(const DensityField& m, const Potential& pot) {
  const auto [lo, hi] = std::minmax_element(m.values.begin(), m.values.end());
  detail::HPrimeTable hp(pot, *lo, *hi, 513);
  hp.cover(*lo, *hi);
  return hp;
}

// g at step k; `hprime` is scratch.
void residual_density(const DensityField& m, const detail::HPrimeTable& hp, std::size_t k, std::vector<double>& hprime,
                      std::vector<double>& g) {
  const std::size_t n = m.n_theta;
  const auto cur = m.level(k);
  const auto next = m.level(k + 1);
  const double dt = m.dt();
  const double inv_dx2 = 1.0 / (m.dtheta() * m.dtheta());
  for (std::size_t j = 0; j < n; ++j) hprime[j] = hp(cur[j]);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t jm = j == 0 ? n - 1 : j - 1;
    const std::size_t jp = j + 1 == n ? 0 : j + 1;
    const double lap = ((hprime[jp] - 2.0 * hprime[j]) + hprime[jm]) * inv_dx2;
    g[j] = (next[j] - cur[j]) / dt - 0.5 * lap;
  }
}

std::mutex fftw_planner_mutex;

}  // namespace

double initial_cost(std::span<const double> m0, const Potential& pot) {
  if (m0.empty()) throw InvalidInput("initial_cost: empty profile");
  std::vector<double> h(m0.size());
  double guess = 0.0;
  for (std::size_t j = 0; j < m0.size(); ++j) {
    const LegendrePoint p = pot.legendre_h(m0[j], guess);
    h[j] = p.h;
    guess = p.lambda_star;
  }
  return pairwise_sum(h) / static_cast<double>(m0.size());
}

MinimalControl minimal_control(const DensityField& m, const Potential& pot, double tolerance) {
  if (m.n_steps == 0) throw InvalidInput("minimal_control: path has a single time level");
  for (double v : m.values) {
    if (!std::isfinite(v)) throw NonFiniteField("minimal_control: path is not finite");
  }
  const std::size_t n = m.n_theta;
  const double dtheta = m.dtheta();
  const detail::HPrimeTable hp = table_for(m, pot);
  std::vector<double> hprime(n), g(n), flux(n);
  std::vector<double> values(m.n_steps * n);
  double defect = 0.0;
  for (std::size_t k = 0; k < m.n_steps; ++k) {
    residual_density(m, hp, k, hprime, g);
    defect = std::max(defect, std::abs(pairwise_sum(g) * dtheta));
    // flux[j] sits on face j+1/2.
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc -= g[j] * dtheta;
      flux[j] = acc;
    }
    const double mean = pairwise_sum(flux) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) values[k * n + j] = flux[j] - mean;
  }
  return {ControlGrid(m.n_steps, n, m.horizon, std::move(values), FaceRule::left), defect <= tolerance, defect};
}

RateDecomposition rate(const DensityField& m, const Potential& pot, double tolerance) {
  MinimalControl mc = minimal_control(m, pot, tolerance);
  double init = std::numeric_limits<double>::infinity();
  bool feasible = mc.feasible;
  try {
    init = initial_cost(m.level(0), pot);
  } catch (const RootNotBracketed&) {
    feasible = false;
  }
  const double dynamic = 0.5 * mc.u_star.l2_norm_sq();
  const double total = feasible ? init + dynamic : std::numeric_limits<double>::infinity();
  return {init, std::move(mc.u_star), dynamic, total, feasible};
}

double h_minus_one_seminorm(std::span<const double> g, double tolerance) {
  const std::size_t n = g.size();
  if (n == 0) return 0.0;
  double scale = 0.0;
  for (double v : g) scale = std::max(scale, std::abs(v));
  const double mean = pairwise_sum(g) / static_cast<double>(n);
  if (std::abs(mean) > tolerance * (1.0 + scale)) throw NotMeanZero("h_minus_one_seminorm: input has nonzero mean");

  std::vector<double> in(g.begin(), g.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex);
    fftw_destroy_plan(plan);
  }

  double sum = 0.0;
  for (std::size_t k = 1; k < out.size(); ++k) {
    const double coef = std::norm(out[k]) / static_cast<double>(n * n);
    const double freq = 2.0 * std::numbers::pi * static_cast<double>(k);
    const double mult = (n % 2 == 0 && k == n / 2) ? 1.0 : 2.0;
    sum += mult * coef / (freq * freq);
  }
  return std::sqrt(sum);
}

double dual_dynamic_cost(const DensityField& m, const Potential& pot) {
  const std::size_t n = m.n_theta;
  const detail::HPrimeTable hp = table_for(m, pot);
  std::vector<double> hprime(n), g(n);
  double total = 0.0;
  for (std::size_t k = 0; k < m.n_steps; ++k) {
    residual_density(m, hp, k, hprime, g);
    const double s = h_minus_one_seminorm(g, 1e-6);
    total += s * s * m.dt();
  }
  return 0.5 * total;
}

}  // namespace gllab
