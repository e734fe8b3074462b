#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>

#include "gllab/errors.hpp"
#include "gllab/potential.hpp"

namespace gllab::detail {

// h' on a Hermite table that widens (2x about its centre) when the field
// leaves it, up to a margin inside the achievable tilted means.
class HPrimeTable {
 public:
  HPrimeTable(const Potential& pot, double lo, double hi, std::size_t nodes) : pot_(pot), nodes_(nodes) {
    const auto [alo, ahi] = pot.mean_range();
    const double margin = 0.01 * (ahi - alo);
    safe_lo_ = alo + margin;
    safe_hi_ = ahi - margin;
    const double pad = std::max(0.5 * (hi - lo), 0.5);
    build(lo - pad, hi + pad);
  }

  /// Returns true when the table changed.
  bool cover(double lo, double hi) {
    bool changed = false;
    while (lo < table_->lo() || hi > table_->hi()) {
      if (table_->lo() <= safe_lo_ && table_->hi() >= safe_hi_) {
        escaped_ = true;
        break;
      }
      const double c = 0.5 * (table_->lo() + table_->hi());
      const double half = table_->hi() - table_->lo();
      build(std::min(c - half, lo), std::max(c + half, hi));
      changed = true;
    }
    return changed;
  }

  double operator()(double x) const { return table_->h_prime(std::clamp(x, table_->lo(), table_->hi())); }
  double max_h_second() const { return table_->max_h_second(); }
  bool escaped() const { return escaped_; }

 private:
  void build(double lo, double hi) {
    lo = std::max(lo, safe_lo_);
    hi = std::min(hi, safe_hi_);
    if (!(hi > lo)) throw RootNotBracketed("density outside the achievable tilted means");
    table_.emplace(pot_, lo, hi, nodes_);
  }

  Potential pot_;
  std::size_t nodes_;
  double safe_lo_, safe_hi_;
  std::optional<LegendreTable> table_;
  bool escaped_ = false;
};

}  // namespace gllab::detail
