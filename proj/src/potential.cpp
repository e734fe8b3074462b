#include "gllab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gllab/errors.hpp"
#include "gllab/kernels.hpp"

namespace gllab {

namespace {

constexpr double kLambdaCap = 64.0;

struct Exponents {
  double max = -std::numeric_limits<double>::infinity();
  std::size_t argmax = 0;
};

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void QuadratureSpec::validate() const {
  if (node_count < 16) throw InvalidInput("quadrature node_count must be at least 16");
  if (!(domain_halfwidth > 0.0) || !std::isfinite(domain_halfwidth))
    throw InvalidInput("quadrature domain_halfwidth must be positive");
  if (!(tolerance > 0.0)) throw InvalidInput("quadrature tolerance must be positive");
}

struct Potential::State {
  std::string name;
  QuadratureSpec quad;
  ScalarFn phi_raw;
  ScalarFn phi_prime;
  ScalarFn phi_second;
  std::optional<double> linear_force;  // phi'(x) = c x
  double offset = 0.0;
  std::shared_ptr<const std::vector<double>> nodes;
  std::vector<double> log_w;
  std::vector<double> phi_prime_nodes;
  double spacing = 0.0;
  double lambda_lo = 0.0, lambda_hi = 0.0;
  double mean_lo = 0.0, mean_hi = 0.0;
  double max_phi_second = 0.0;
  std::shared_ptr<const TiltedSampler> base;

  // log of trapezoid sum of exp(lambda x_k + log_w_k); throws when either
  // endpoint holds more than the tolerated share of the mass.
  double log_mgf(double lambda, Exponents* ex = nullptr) const {
    const auto& x = *nodes;
    Exponents e;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double a = lambda * x[k] + log_w[k];
      if (a > e.max) {
        e.max = a;
        e.argmax = k;
      }
    }
    if (!std::isfinite(e.max)) throw QuadratureDiverged("non-finite integrand at lambda=" + fmt_double(lambda));
    double sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) sum += std::exp(lambda * x[k] + log_w[k] - e.max);
    const double lse = e.max + std::log(sum);
    const double edge = std::max(std::exp(lambda * x.front() + log_w.front() - lse),
                                 std::exp(lambda * x.back() + log_w.back() - lse));
    if (!(edge <= quad.tolerance)) {
      throw QuadratureDiverged("tilted mass at the quadrature boundary (" + fmt_double(edge) +
                               ") exceeds tolerance at lambda=" + fmt_double(lambda));
    }
    if (ex) *ex = e;
    return lse;
  }

  TiltMoments moments(double lambda) const {
    Exponents e;
    const double lse = log_mgf(lambda, &e);
    const auto& x = *nodes;
    const double shift = x[e.argmax];
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double p = std::exp(lambda * x[k] + log_w[k] - lse);
      const double d = x[k] - shift;
      s0 += p;
      s1 += p * d;
      s2 += p * d * d;
    }
    const double mean_d = s1 / s0;
    return {lse, shift + mean_d, std::max(s2 / s0 - mean_d * mean_d, 0.0)};
  }

  bool tilt_ok(double lambda) const {
    try {
      log_mgf(lambda);
      return true;
    } catch (const QuadratureDiverged&) {
      return false;
    }
  }

  // Largest |lambda| <= kLambdaCap in direction `sign` with a trustworthy quadrature.
  double tilt_edge(double sign) const {
    if (tilt_ok(sign * kLambdaCap)) return sign * kLambdaCap;
    double ok = 0.0, bad = kLambdaCap;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (ok + bad);
      if (tilt_ok(sign * mid)) ok = mid;
      else bad = mid;
    }
    return sign * ok;
  }
};

Potential::Potential(ScalarFn phi, ScalarFn phi_prime, ScalarFn phi_double_prime,
                     QuadratureSpec quad, std::string name) {
  quad.validate();
  auto s = std::make_shared<State>();
  s->name = std::move(name);
  s->quad = quad;
  s->phi_raw = std::move(phi);
  s->phi_prime = std::move(phi_prime);
  s->phi_second = std::move(phi_double_prime);

  const std::size_t n = quad.node_count;
  const double R = quad.domain_halfwidth;
  s->spacing = 2.0 * R / static_cast<double>(n - 1);
  auto nodes = std::make_shared<std::vector<double>>(n);
  for (std::size_t k = 0; k < n; ++k) (*nodes)[k] = -R + s->spacing * static_cast<double>(k);
  nodes->back() = R;
  s->nodes = nodes;

  // Trapezoid log-mass of exp(-phi) on `count` equispaced nodes over [-R, R].
  auto raw_log_mass = [&](std::size_t count) {
    const double h = 2.0 * R / static_cast<double>(count - 1);
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> a(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double x = k + 1 == count ? R : -R + h * static_cast<double>(k);
      const double w = (k == 0 || k + 1 == count) ? 0.5 * h : h;
      a[k] = std::log(w) - s->phi_raw(x);
      mx = std::max(mx, a[k]);
    }
    if (!std::isfinite(mx)) throw QuadratureDiverged("phi is not finite on the quadrature grid");
    double sum = 0.0;
    for (double v : a) sum += std::exp(v - mx);
    return mx + std::log(sum);
  };
  s->offset = raw_log_mass(n);
  const double refined = raw_log_mass(2 * n - 1);
  if (std::abs(refined - s->offset) > quad.tolerance) {
    throw QuadratureDiverged("normalization changes by " + fmt_double(std::abs(refined - s->offset)) +
                             " when the quadrature grid is doubled; increase node_count");
  }

  s->log_w.resize(n);
  s->phi_prime_nodes.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 || k + 1 == n) ? 0.5 * s->spacing : s->spacing;
    s->log_w[k] = std::log(w) - s->phi_raw((*nodes)[k]) - s->offset;
    s->phi_prime_nodes[k] = s->phi_prime((*nodes)[k]);
  }

  s->log_mgf(0.0);  // the untilted law must itself fit in the window
  s->lambda_lo = s->tilt_edge(-1.0);
  s->lambda_hi = s->tilt_edge(1.0);
  s->mean_lo = s->moments(s->lambda_lo).mean;
  s->mean_hi = s->moments(s->lambda_hi).mean;

  const double peak = *std::max_element(s->log_w.begin(), s->log_w.end());
  const double floor = peak + std::log(1e-8);
  for (std::size_t k = 0; k < n; ++k) {
    if (s->log_w[k] >= floor)
      s->max_phi_second = std::max(s->max_phi_second, std::abs(s->phi_second((*nodes)[k])));
  }

  state_ = s;
  s->base = std::make_shared<const TiltedSampler>(*this, 0.0);
}

Potential Potential::gaussian(double variance, QuadratureSpec quad) {
  if (!(variance > 0.0)) throw InvalidInput("gaussian variance must be positive");
  const double inv = 1.0 / variance;
  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi * variance);
  Potential p([=](double x) { return 0.5 * inv * x * x + log_norm; },
              [=](double x) { return inv * x; }, [=](double) { return inv; }, quad, "gaussian");
  std::const_pointer_cast<State>(p.state_)->linear_force = inv;
  return p;
}

Potential Potential::quartic(double a, double b, QuadratureSpec quad) {
  if (b < 0.0 || (b == 0.0 && !(a > 0.0)))
    throw InvalidInput("quartic potential needs b >= 0, and a > 0 when b == 0");
  Potential p([=](double x) { return 0.5 * a * x * x + 0.25 * b * x * x * x * x; },
              [=](double x) { return a * x + b * x * x * x; },
              [=](double x) { return a + 3.0 * b * x * x; }, quad, "quartic");
  if (b == 0.0) std::const_pointer_cast<State>(p.state_)->linear_force = a;
  return p;
}

const std::string& Potential::name() const { return state_->name; }
const QuadratureSpec& Potential::quadrature() const { return state_->quad; }
double Potential::normalization_offset() const { return state_->offset; }

double Potential::phi(double x) const { return state_->phi_raw(x) + state_->offset; }
double Potential::phi_prime(double x) const { return state_->phi_prime(x); }
double Potential::phi_double_prime(double x) const { return state_->phi_second(x); }

void Potential::phi_prime_batch(std::span<const double> x, std::span<double> out) const {
  if (state_->linear_force) {
    kernels::active().scale(*state_->linear_force, x.data(), out.data(), x.size());
    return;
  }
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = state_->phi_prime(x[i]);
}

double Potential::log_mgf(double lambda) const { return state_->log_mgf(lambda); }

TiltMoments Potential::tilted_moments(double lambda) const { return state_->moments(lambda); }

LegendrePoint Potential::legendre_h(double x) const { return legendre_h(x, 0.0); }

LegendrePoint Potential::legendre_h(double x, double lambda_guess) const {
  const State& s = *state_;
  if (!std::isfinite(x)) throw RootNotBracketed("legendre_h: non-finite argument");
  double lo = std::max(-1.0, s.lambda_lo);
  double hi = std::min(1.0, s.lambda_hi);
  while (s.moments(lo).mean > x) {
    if (lo <= s.lambda_lo) throw RootNotBracketed("legendre_h: x=" + fmt_double(x) + " is below the achievable tilted means");
    lo = std::max(2.0 * lo, s.lambda_lo);
  }
  while (s.moments(hi).mean < x) {
    if (hi >= s.lambda_hi) throw RootNotBracketed("legendre_h: x=" + fmt_double(x) + " is above the achievable tilted means");
    hi = std::min(2.0 * hi, s.lambda_hi);
  }

  double lam = std::clamp(lambda_guess, lo, hi);
  TiltMoments m = s.moments(lam);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = m.mean - x;
    if (std::abs(f) <= 1e-15 * (1.0 + std::abs(x))) break;
    if (f > 0.0) hi = lam;
    else lo = lam;
    double next = m.variance > 0.0 ? lam - f / m.variance : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - lam) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(lam))) {
      lam = next;
      m = s.moments(lam);
      break;
    }
    lam = next;
    m = s.moments(lam);
  }
  return {lam * x - m.log_mgf, lam};
}

double Potential::local_equilibrium_average(double x, double cutoff) const {
  if (!(cutoff > 0.0)) throw InvalidInput("local_equilibrium_average: cutoff must be positive");
  const State& s = *state_;
  const double lambda = legendre_h(x).lambda_star;
  const double lse = s.log_mgf(lambda);
  const auto& nodes = *s.nodes;
  double acc = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double p = std::exp(lambda * nodes[k] + s.log_w[k] - lse);
    acc += p * std::clamp(s.phi_prime_nodes[k], -cutoff, cutoff);
  }
  return acc;
}

double Potential::sigma_moment(double sigma) const {
  const State& s = *state_;
  const auto& nodes = *s.nodes;
  std::vector<double> a(nodes.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    a[k] = sigma * std::abs(s.phi_prime_nodes[k]) + s.log_w[k];
    mx = std::max(mx, a[k]);
  }
  if (!std::isfinite(mx)) throw QuadratureDiverged("sigma_moment: non-finite integrand");
  double sum = 0.0;
  for (double v : a) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  const double edge = std::max(std::exp(a.front() - lse), std::exp(a.back() - lse));
  if (!(edge <= s.quad.tolerance))
    throw QuadratureDiverged("sigma_moment: integrand not negligible at the boundary for sigma=" + fmt_double(sigma));
  return std::exp(lse);
}

std::pair<double, double> Potential::lambda_range() const { return {state_->lambda_lo, state_->lambda_hi}; }
std::pair<double, double> Potential::mean_range() const { return {state_->mean_lo, state_->mean_hi}; }
double Potential::max_abs_phi_double_prime() const { return state_->max_phi_second; }
std::span<const double> Potential::nodes() const { return *state_->nodes; }
std::span<const double> Potential::log_weights() const { return state_->log_w; }
std::span<const double> Potential::phi_prime_at_nodes() const { return state_->phi_prime_nodes; }
double Potential::node_spacing() const { return state_->spacing; }
const TiltedSampler& Potential::base_sampler() const { return *state_->base; }

// ---------------------------------------------------------------------------

TiltedSampler::TiltedSampler(const Potential& pot, double lambda)
    : nodes_(pot.state_->nodes),
      spacing_(pot.node_spacing()),
      lambda_(lambda),
      log_mgf_(pot.log_mgf(lambda)) {
  const auto x = pot.nodes();
  const auto lw = pot.log_weights();
  cdf_.resize(x.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    acc += std::exp(lambda * x[k] + lw[k] - log_mgf_);
    cdf_[k] = acc;
  }
  for (double& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

std::pair<std::size_t, double> TiltedSampler::locate(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t k = it == cdf_.end() ? cdf_.size() - 1 : static_cast<std::size_t>(it - cdf_.begin());
  const double below = k == 0 ? 0.0 : cdf_[k - 1];
  const double width = cdf_[k] - below;
  const double pos = width > 0.0 ? std::clamp((u - below) / width, 0.0, std::nextafter(1.0, 0.0)) : 0.5;
  return {k, pos};
}

double TiltedSampler::place_in_cell(std::size_t cell, double position) const {
  return (*nodes_)[cell] + spacing_ * (position - 0.5);
}

double TiltedSampler::sample(Rng& rng) const {
  const auto [k, pos] = locate(uniform01(rng));
  return place_in_cell(k, pos);
}

TiltFamilySampler::TiltFamilySampler(const Potential& pot, double lambda_lo, double lambda_hi,
                                     double spacing)
    : pot_(pot), lo_(lambda_lo), spacing_(spacing) {
  if (!(spacing > 0.0) || !(lambda_hi >= lambda_lo))
    throw InvalidInput("TiltFamilySampler: need lambda_lo <= lambda_hi and spacing > 0");
  const auto count = static_cast<std::size_t>(std::ceil((lambda_hi - lambda_lo) / spacing)) + 1;
  tables_.reserve(count);
  for (std::size_t g = 0; g < count; ++g) tables_.emplace_back(pot, lo_ + spacing_ * static_cast<double>(g));
  hi_ = tables_.back().lambda();
}

double TiltFamilySampler::sample(double lambda, Rng& rng) const {
  if (!(lambda >= lo_ && lambda <= hi_))
    throw InvalidInput("TiltFamilySampler: lambda " + fmt_double(lambda) + " outside the tabulated range");
  auto g = std::min(static_cast<std::size_t>((lambda - lo_) / spacing_), tables_.size() - 1);
  if (lambda == tables_[g].lambda()) return tables_[g].sample(rng);
  if (g + 1 == tables_.size()) --g;
  const TiltedSampler& left = tables_[g];
  const TiltedSampler& right = tables_[g + 1];
  // Proposal: mixture of the two neighbouring tilts weighted by their masses.
  const double p_left = 1.0 / (1.0 + std::exp(right.log_mgf() - left.log_mgf()));
  const auto x = pot_.nodes();
  for (;;) {
    const TiltedSampler& t = uniform01(rng) < p_left ? left : right;
    const auto [k, pos] = t.locate(uniform01(rng));
    const double accept = 1.0 / (std::exp((left.lambda() - lambda) * x[k]) +
                                 std::exp((right.lambda() - lambda) * x[k]));
    if (uniform01(rng) < accept) return t.place_in_cell(k, pos);
  }
}

double sample_tilted(const Potential& pot, double lambda, Rng& rng) {
  if (lambda == 0.0) return pot.base_sampler().sample(rng);
  return TiltedSampler(pot, lambda).sample(rng);
}

// ---------------------------------------------------------------------------

LegendreTable::LegendreTable(const Potential& pot, double lo, double hi, std::size_t nodes)
    : lo_(lo), hi_(hi) {
  if (nodes < 2 || !(hi > lo)) throw InvalidInput("LegendreTable: need hi > lo and at least 2 nodes");
  step_ = (hi - lo) / static_cast<double>(nodes - 1);
  lambda_.resize(nodes);
  slope_.resize(nodes);
  h_.resize(nodes);
  double guess = 0.0;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double x = k + 1 == nodes ? hi : lo + step_ * static_cast<double>(k);
    const LegendrePoint p = pot.legendre_h(x, guess);
    lambda_[k] = p.lambda_star;
    h_[k] = p.h;
    slope_[k] = 1.0 / pot.tilted_moments(p.lambda_star).variance;
    guess = p.lambda_star;
  }
}

namespace {
struct HermiteBasis {
  double h00, h10, h01, h11;
};
HermiteBasis hermite(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t, -2 * t3 + 3 * t2, t3 - t2};
}
}  // namespace

double LegendreTable::h_prime(double x) const {
  if (!contains(x)) throw InvalidInput("LegendreTable: argument outside [lo, hi]");
  const double s = (x - lo_) / step_;
  auto k = std::min(static_cast<std::size_t>(s), lambda_.size() - 2);
  const double t = s - static_cast<double>(k);
  const HermiteBasis b = hermite(t);
  return b.h00 * lambda_[k] + b.h10 * step_ * slope_[k] + b.h01 * lambda_[k + 1] +
         b.h11 * step_ * slope_[k + 1];
}

double LegendreTable::h(double x) const {
  if (!contains(x)) throw InvalidInput("LegendreTable: argument outside [lo, hi]");
  const double s = (x - lo_) / step_;
  auto k = std::min(static_cast<std::size_t>(s), h_.size() - 2);
  const double t = s - static_cast<double>(k);
  const HermiteBasis b = hermite(t);
  return b.h00 * h_[k] + b.h10 * step_ * lambda_[k] + b.h01 * h_[k + 1] + b.h11 * step_ * lambda_[k + 1];
}

double LegendreTable::max_h_second() const { return *std::max_element(slope_.begin(), slope_.end()); }

}  // namespace gllab
