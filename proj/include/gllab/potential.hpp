#pragma once

// Single-site potential phi and the objects derived from it: the reference
// law Phi(dx) = exp(-phi(x)) dx, the cumulant generator rho(lambda) = log M(lambda),
// its Legendre transform h, and samplers for the tilted laws
// exp(lambda x - phi(x) - rho(lambda)) dx.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gllab/rng.hpp"

namespace gllab {

/// Fixed-grid trapezoid rule on [-domain_halfwidth, domain_halfwidth].
struct QuadratureSpec {
  std::size_t node_count = 4096;
  double domain_halfwidth = 12.0;
  /// Largest probability mass a tilted law may put on either endpoint node
  /// before the integral counts as truncated. Also bounds the
  /// normalization change when the grid is halved.
  double tolerance = 1e-10;

  void validate() const;
};

struct TiltMoments {
  double log_mgf;   ///< rho(lambda)
  double mean;      ///< rho'(lambda)
  double variance;  ///< rho''(lambda)
};

struct LegendrePoint {
  double h;            ///< h(x) = sup_lambda { lambda x - rho(lambda) }
  double lambda_star;  ///< maximizer; equals h'(x)
};

class TiltedSampler;

class Potential {
 public:
  using ScalarFn = std::function<double(double)>;

  /// `phi` need not be normalized; the additive offset making
  /// int exp(-phi) = 1 is computed here once.
  Potential(ScalarFn phi, ScalarFn phi_prime, ScalarFn phi_double_prime, QuadratureSpec quad = {},
            std::string name = "custom");

  /// phi(x) = x^2 / (2 variance) + log(sqrt(2 pi variance)); Phi = N(0, variance).
  static Potential gaussian(double variance = 1.0, QuadratureSpec quad = {});

  /// phi(x) = a x^2 / 2 + b x^4 / 4 + offset. Requires b >= 0, and a > 0 when b == 0.
  static Potential quartic(double a, double b, QuadratureSpec quad = {});

  const std::string& name() const;
  const QuadratureSpec& quadrature() const;
  double normalization_offset() const;

  double phi(double x) const;
  double phi_prime(double x) const;
  double phi_double_prime(double x) const;

  /// out[i] = phi'(x[i]); uses the vector kernels when phi' is linear.
  void phi_prime_batch(std::span<const double> x, std::span<double> out) const;

  double log_mgf(double lambda) const;
  TiltMoments tilted_moments(double lambda) const;

  /// Safeguarded Newton on rho'(lambda) = x with bisection fallback. The
  /// bracket grows geometrically from [-1, 1] up to |lambda| = 64 (or the
  /// edge of lambda_range()).
  LegendrePoint legendre_h(double x) const;
  LegendrePoint legendre_h(double x, double lambda_guess) const;

  /// e^{-rho(lambda)} int e^{lambda y - phi(y)} phi'_l(y) dy with lambda = h'(x)
  /// and phi'_l the clamp of phi' to [-l, l].
  double local_equilibrium_average(double x, double cutoff) const;

  /// int exp(sigma |phi'(x)| - phi(x)) dx; throws QuadratureDiverged if truncated.
  double sigma_moment(double sigma) const;

  /// Tilts for which the quadrature window holds the tilted law.
  std::pair<double, double> lambda_range() const;
  /// Achievable tilted means, rho' over lambda_range().
  std::pair<double, double> mean_range() const;

  /// max |phi''| over the region where the density of Phi is at least
  /// 1e-8 of its peak.
  double max_abs_phi_double_prime() const;

  std::span<const double> nodes() const;
  /// log(trapezoid weight) - phi(x_k), normalized.
  std::span<const double> log_weights() const;
  std::span<const double> phi_prime_at_nodes() const;
  double node_spacing() const;

  /// Inverse-CDF sampler for Phi itself, tabulated at construction.
  const TiltedSampler& base_sampler() const;

 private:
  friend class TiltedSampler;
  struct State;
  std::shared_ptr<const State> state_;
};

/// Inverse-CDF sampling of the tabulated tilted law: cell k around node x_k
/// carries probability proportional to w_k exp(lambda x_k - phi(x_k)) and
/// the law is uniform inside a cell.
class TiltedSampler {
 public:
  TiltedSampler(const Potential& pot, double lambda);

  double lambda() const { return lambda_; }
  double log_mgf() const { return log_mgf_; }
  double sample(Rng& rng) const;

  /// Cell containing CDF level `u` and the position of `u` inside that cell in [0, 1).
  std::pair<std::size_t, double> locate(double u) const;
  double place_in_cell(std::size_t cell, double position) const;

 private:
  // Shares the node grid only; holding the Potential itself would form a
  // reference cycle through its eagerly built base sampler.
  std::shared_ptr<const std::vector<double>> nodes_;
  double spacing_;
  double lambda_;
  double log_mgf_;
  std::vector<double> cdf_;
};

/// Samples the tilted law for any lambda in [lo, hi]. Tables sit on a grid
/// of tilts; in between, draws are accepted from the two neighbouring tables
/// so the output has exactly the tabulated law of the requested tilt.
class TiltFamilySampler {
 public:
  TiltFamilySampler(const Potential& pot, double lambda_lo, double lambda_hi,
                    double spacing = 0.05);

  double sample(double lambda, Rng& rng) const;
  std::pair<double, double> range() const { return {lo_, hi_}; }

 private:
  Potential pot_;
  double lo_;
  double spacing_;
  double hi_;
  std::vector<TiltedSampler> tables_;
};

/// h and h' interpolated on [lo, hi] by cubic Hermite (h'' = 1 / rho''(h')).
/// Building it costs one Newton solve per node; evaluation is O(1).
class LegendreTable {
 public:
  LegendreTable(const Potential& pot, double lo, double hi, std::size_t nodes = 257);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool contains(double x) const { return x >= lo_ && x <= hi_; }

  /// h'(x); x must lie in [lo, hi].
  double h_prime(double x) const;
  double h(double x) const;
  /// max of h'' = 1/rho'' over the nodes.
  double max_h_second() const;

 private:
  double lo_;
  double hi_;
  double step_;
  std::vector<double> lambda_;   // h'
  std::vector<double> slope_;    // h''
  std::vector<double> h_;
};

/// One draw from the tilted law with tilt `lambda`.
double sample_tilted(const Potential& pot, double lambda, Rng& rng);

}  // namespace gllab
