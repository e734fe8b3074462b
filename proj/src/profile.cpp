#include "gllab/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "gllab/errors.hpp"

namespace gllab {

namespace {

constexpr std::size_t kProbe = 4096;

std::pair<double, double> probe_range(const std::function<double(double)>& f) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k <= kProbe; ++k) {
    const double v = f(static_cast<double>(k) / kProbe);
    if (!std::isfinite(v)) throw InvalidInput("profile function is not finite on [0, 1]");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

// The tilt field may take values slightly past the probed extremes between
// probe points; the padding covers that.
std::pair<double, double> padded(std::pair<double, double> r, double rel) {
  const double pad = rel * (r.second - r.first) + 1e-3;
  return {r.first - pad, r.second + pad};
}

}  // namespace

ProfileMeasure equilibrium_profile(const Potential& pot) {
  const double mean = pot.tilted_moments(0.0).mean;
  return {"equilibrium",
          [pot](double, Rng& rng) { return pot.base_sampler().sample(rng); },
          [mean](double) { return mean; },
          [](double) { return 0.0; }};
}

ProfileMeasure point_mass_profile(std::function<double(double)> m0) {
  return {"point_mass",
          [m0](double theta, Rng&) { return m0(theta); },
          m0,
          [](double) { return std::numeric_limits<double>::infinity(); }};
}

ProfileMeasure tilted_profile(const Potential& pot, std::function<double(double)> m0, std::string name) {
  const auto [mlo, mhi] = padded(probe_range(m0), 0.01);
  const auto [alo, ahi] = pot.mean_range();
  if (!(mlo > alo && mhi < ahi)) throw RootNotBracketed("tilted profile mean outside the achievable range");
  auto table = std::make_shared<const LegendreTable>(pot, mlo, mhi);
  auto family = std::make_shared<const TiltFamilySampler>(pot, table->h_prime(mlo), table->h_prime(mhi));
  return {std::move(name),
          [m0, table, family](double theta, Rng& rng) { return family->sample(table->h_prime(m0(theta)), rng); },
          m0,
          [m0, table](double theta) { return table->h(m0(theta)); }};
}

ProfileMeasure tilt_field_profile(const Potential& pot, std::function<double(double)> lambda, std::string name) {
  const auto [llo, lhi] = padded(probe_range(lambda), 0.0);
  const auto [elo, ehi] = pot.lambda_range();
  if (!(llo > elo && lhi < ehi)) throw QuadratureDiverged("tilt field outside the finite-MGF range");
  auto family = std::make_shared<const TiltFamilySampler>(pot, llo, lhi);
  return {std::move(name),
          [lambda, family](double theta, Rng& rng) { return family->sample(lambda(theta), rng); },
          [pot, lambda](double theta) { return pot.tilted_moments(lambda(theta)).mean; },
          [pot, lambda](double theta) {
            const double l = lambda(theta);
            const TiltMoments m = pot.tilted_moments(l);
            return l * m.mean - m.log_mgf;
          }};
}

ProfileMeasure tilted_sine_profile(const Potential& pot, double amplitude) {
  return tilted_profile(pot, [amplitude](double theta) { return amplitude * std::sin(2.0 * std::numbers::pi * theta); },
                        "tilted_sine");
}

ProfileMeasure constant_profile(const Potential& pot, double c) {
  return tilted_profile(pot, [c](double) { return c; }, "constant");
}

double cell_position(std::size_t site, std::size_t n_sites, double u) {
  return (static_cast<double>(site) + (1.0 - u)) / static_cast<double>(n_sites);
}

LatticeState sample_initial_from_profile(const ProfileMeasure& profile, std::size_t n_sites, Rng& rng) {
  if (n_sites == 0) throw InvalidInput("sample_initial_from_profile: n_sites must be positive");
  LatticeState s;
  s.charges.resize(n_sites);
  for (std::size_t i = 0; i < n_sites; ++i) {
    const double theta = cell_position(i, n_sites, uniform01(rng));
    s.charges[i] = profile.conditional_sampler(theta, rng);
  }
  return s;
}

double entropy_cost_of_profile(const ProfileMeasure& profile, std::size_t n_sites) {
  if (n_sites == 0) throw InvalidInput("entropy_cost_of_profile: n_sites must be positive");
  static constexpr std::array<double, 5> node{-0.9061798459386640, -0.5384693101056831, 0.0,
                                              0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weight{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                0.4786286704993665, 0.2369268850561891};
  const double width = 1.0 / static_cast<double>(n_sites);
  double total = 0.0;
  for (std::size_t i = 0; i < n_sites; ++i) {
    const double mid = (static_cast<double>(i) + 0.5) * width;
    double cell = 0.0;
    for (std::size_t q = 0; q < node.size(); ++q) cell += weight[q] * profile.entropy_density(mid + 0.5 * width * node[q]);
    total += 0.5 * width * cell;
  }
  if (!std::isfinite(total)) throw QuadratureDiverged("profile entropy is not finite");
  return total;
}

}  // namespace gllab
