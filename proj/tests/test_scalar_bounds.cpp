#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rnncert/scalar_bounds.hpp"

using namespace rnncert;

namespace {

double f_ref(ScalarFn f, double v) { return f == ScalarFn::Tanh ? std::tanh(v) : oracle::sig(v); }

// Largest amount by which either line is on the wrong side of f.
double violation(ScalarFn f, double l, double u, const LinePair& lines, int points = 1000) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double v = points == 1 ? l : l + (u - l) * i / (points - 1.0);
    worst = std::max(worst, f_ref(f, v) - lines.upper(v));
    worst = std::max(worst, lines.lower(v) - f_ref(f, v));
  }
  return worst;
}

}  // namespace

TEST_CASE("degenerate interval gives exact constants") {
  const auto lines = bound_activation(ScalarFn::Sigmoid, 0.0, 0.0);
  CHECK(lines.upper.slope == 0.0);
  CHECK(lines.lower.slope == 0.0);
  CHECK(lines.upper.intercept == 0.5);
  CHECK(lines.lower.intercept == 0.5);
}

TEST_CASE("tanh on [-2, 2]") {
  const auto lines = bound_activation(ScalarFn::Tanh, -2.0, 2.0);
  CHECK(violation(ScalarFn::Tanh, -2.0, 2.0, lines) <= 1e-9);
  CHECK(lines.upper.side == Side::Upper);
  CHECK(lines.lower.side == Side::Lower);
}

TEST_CASE("sigmoid on the concave part uses chord below and tangent above") {
  const auto lines = bound_activation(ScalarFn::Sigmoid, 1.0, 3.0);
  CHECK(violation(ScalarFn::Sigmoid, 1.0, 3.0, lines) <= 1e-9);
  const double chord = (oracle::sig(3.0) - oracle::sig(1.0)) / 2.0;
  CHECK(lines.lower.slope == doctest::Approx(chord));
  CHECK(lines.lower(1.0) == doctest::Approx(oracle::sig(1.0)));
  const double s2 = oracle::sig(2.0);
  CHECK(lines.upper.slope == doctest::Approx(s2 * (1 - s2)));
  CHECK(lines.upper(2.0) == doctest::Approx(s2));
}

TEST_CASE("convex part mirrors") {
  const auto lines = bound_activation(ScalarFn::Tanh, -3.0, -0.5);
  CHECK(violation(ScalarFn::Tanh, -3.0, -0.5, lines) <= 1e-9);
  CHECK(lines.upper(-3.0) == doctest::Approx(std::tanh(-3.0)));
  CHECK(lines.upper(-0.5) == doctest::Approx(std::tanh(-0.5)));
}

TEST_CASE("straddling intervals touch the far endpoint") {
  const auto lines = bound_activation(ScalarFn::Tanh, -1.0, 4.0);
  CHECK(violation(ScalarFn::Tanh, -1.0, 4.0, lines) <= 1e-9);
  // upper tangent passes through (l, f(l))
  CHECK(lines.upper(-1.0) == doctest::Approx(std::tanh(-1.0)).epsilon(1e-6));
}

TEST_CASE("randomised intervals pass the 1000-point check") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> end(-10.0, 10.0);
  for (ScalarFn f : {ScalarFn::Sigmoid, ScalarFn::Tanh}) {
    for (int i = 0; i < 300; ++i) {
      double l = end(gen), u = end(gen);
      if (l > u) std::swap(l, u);
      if (i % 10 == 0) u = l + 1e-3 * (i % 7);
      const auto lines = bound_activation(f, l, u);
      CHECK(violation(f, l, u, lines) <= 1e-9);
    }
  }
}

TEST_CASE("tight at collapse") {
  for (ScalarFn f : {ScalarFn::Sigmoid, ScalarFn::Tanh}) {
    for (double l : {-3.0, -0.2, 0.0, 0.7, 5.0}) {
      const auto lines = bound_activation(f, l, l + 1e-8);
      CHECK(lines.upper(l) - lines.lower(l) <= 1e-6);
    }
  }
}

TEST_CASE("lines stay valid on sub-intervals") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double l = -6.0 + 6.0 * unit(gen), u = l + 8.0 * unit(gen);
    const auto lines = bound_activation(ScalarFn::Tanh, l, u);
    const double a = l + (u - l) * unit(gen) * 0.5, b = u - (u - l) * unit(gen) * 0.5;
    CHECK(violation(ScalarFn::Tanh, a, b, lines) <= 1e-9);
  }
}

TEST_CASE("invalid intervals") {
  CHECK_THROWS_AS(bound_activation(ScalarFn::Tanh, 1.0, 0.0), IntervalError);
  CHECK_THROWS_AS(bound_activation(ScalarFn::Tanh, -INFINITY, 0.0), IntervalError);
  CHECK_THROWS_AS(bound_activation(ScalarFn::Tanh, 0.0, NAN), IntervalError);
}

TEST_CASE("shifted form") {
  const BoundingLine line{2.0, 1.0, Side::Upper};
  CHECK(line.slope * (3.0 + line.shift()) == doctest::Approx(line(3.0)));
}
