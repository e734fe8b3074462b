#pragma once

// Dense tableau simplex for  max c.x  s.t.  A x <= b, x >= 0, b >= 0.
// The slack basis is feasible, so no phase one is needed.

#include <cstddef>
#include <span>
#include <vector>

namespace gllab {

struct LpSolution {
  double objective = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

/// `a` is row-major with rows = b.size() and cols = c.size().
LpSolution maximize_standard_form(std::span<const double> a, std::span<const double> b,
                                  std::span<const double> c);

}  // namespace gllab
