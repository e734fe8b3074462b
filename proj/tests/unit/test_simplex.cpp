#include <doctest.h>

#include <cmath>
#include <vector>

#include "gllab/errors.hpp"
#include "gllab/simplex.hpp"

using namespace gllab;

TEST_CASE("simplex solves a textbook problem") {
  // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
  const std::vector<double> a{1, 0, 0, 2, 3, 2};
  const std::vector<double> b{4, 12, 18};
  const std::vector<double> c{3, 5};
  const LpSolution s = maximize_standard_form(a, b, c);
  CHECK(std::abs(s.objective - 36.0) < 1e-12);
  CHECK(std::abs(s.x[0] - 2.0) < 1e-12);
  CHECK(std::abs(s.x[1] - 6.0) < 1e-12);
}

TEST_CASE("simplex handles degenerate vertices") {
  // Several constraints meet at the optimum (1, 1).
  const std::vector<double> a{1, 0, 0, 1, 1, 1, 1, -1, -1, 1};
  const std::vector<double> b{1, 1, 2, 0, 0};
  const std::vector<double> c{1, 1};
  CHECK(std::abs(maximize_standard_form(a, b, c).objective - 2.0) < 1e-12);
  const std::vector<double> b2{1, 1, 1, 0, 0};
  CHECK(std::abs(maximize_standard_form(a, b2, c).objective - 1.0) < 1e-12);
}

TEST_CASE("simplex input checks") {
  const std::vector<double> a{1, 1};
  CHECK_THROWS_AS(maximize_standard_form(a, std::vector<double>{-1.0}, std::vector<double>{1.0, 1.0}), InvalidInput);
  CHECK_THROWS_AS(maximize_standard_form(a, std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 1.0}), InvalidInput);
  const std::vector<double> unbounded{-1.0};
  CHECK_THROWS_AS(maximize_standard_form(unbounded, std::vector<double>{1.0}, std::vector<double>{1.0}), NumericalError);
}
