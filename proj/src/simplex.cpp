#include "gllab/simplex.hpp"

#include <algorithm>
#include <cmath>

#include "gllab/errors.hpp"
#include "gllab/kernels.hpp"

namespace gllab {

LpSolution maximize_standard_form(std::span<const double> a, std::span<const double> b,
                                  std::span<const double> c) {
  const std::size_t m = b.size();
  const std::size_t n = c.size();
  if (a.size() != m * n) throw InvalidInput("simplex: constraint matrix has the wrong shape");
  for (double v : b) {
    if (!(v >= 0.0)) throw InvalidInput("simplex: right-hand side must be nonnegative");
  }

  // Columns: n structural, m slack, 1 rhs. Row m holds the reduced costs.
  const std::size_t width = n + m + 1;
  std::vector<double> t((m + 1) * width, 0.0);
  auto row = [&](std::size_t i) { return t.data() + i * width; };
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(a.data() + i * n, n, row(i));
    row(i)[n + i] = 1.0;
    row(i)[n + m] = b[i];
  }
  double cmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    row(m)[j] = -c[j];
    cmax = std::max(cmax, std::abs(c[j]));
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  const double eps = 1e-12 * std::max(1.0, cmax);
  const double pivot_eps = 1e-12;
  const auto& k = kernels::active();
  bool bland = false;
  std::size_t degenerate_run = 0;
  const std::size_t max_pivots = 50 * (m + n) + 1000;
  LpSolution out;

  for (;;) {
    std::size_t enter = width;
    if (bland) {
      for (std::size_t j = 0; j + 1 < width; ++j) {
        if (row(m)[j] < -eps) {
          enter = j;
          break;
        }
      }
    } else {
      double best = -eps;
      for (std::size_t j = 0; j + 1 < width; ++j) {
        if (row(m)[j] < best) {
          best = row(m)[j];
          enter = j;
        }
      }
    }
    if (enter == width) break;

    std::size_t leave = m;
    double ratio = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double coef = row(i)[enter];
      if (coef <= pivot_eps) continue;
      const double r = row(i)[n + m] / coef;
      if (leave == m || r < ratio || (r == ratio && basis[i] < basis[leave])) {
        leave = i;
        ratio = r;
      }
    }
    if (leave == m) throw NumericalError("simplex: objective is unbounded");

    degenerate_run = ratio <= 0.0 ? degenerate_run + 1 : 0;
    if (degenerate_run > m) bland = true;

    double* p = row(leave);
    const double inv = 1.0 / p[enter];
    k.scale(inv, p, p, width);
    p[enter] = 1.0;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = row(i)[enter];
      if (f == 0.0) continue;
      k.axpy(-f, p, row(i), width);
      row(i)[enter] = 0.0;
    }
    basis[leave] = enter;
    if (++out.pivots > max_pivots) throw NumericalError("simplex: pivot limit reached");
  }

  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) out.x[basis[i]] = row(i)[n + m];
  }
  out.objective = row(m)[n + m];
  return out;
}

}  // namespace gllab
