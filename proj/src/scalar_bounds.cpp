#include "rnncert/scalar_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "rnncert/model.hpp"

namespace rnncert {

double eval(ScalarFn f, double v) { return f == ScalarFn::Tanh ? std::tanh(v) : sigmoid(v); }

double derivative(ScalarFn f, double v) {
  if (f == ScalarFn::Tanh) {
    const double t = std::tanh(v);
    return 1.0 - t * t;
  }
  const double s = sigmoid(v);
  return s * (1.0 - s);
}

namespace {

constexpr double kDegenerateWidth = 1e-12;
constexpr int kBisectionSteps = 40;
constexpr int kVerifyPoints = 100;
constexpr double kVerifyPad = 1e-12;

BoundingLine chord(ScalarFn f, double l, double u, Side side) {
  const double fl = eval(f, l);
  const double slope = (eval(f, u) - fl) / (u - l);
  return {slope, fl - slope * l, side};
}

BoundingLine tangent(ScalarFn f, double d, Side side) {
  const double slope = derivative(f, d);
  return {slope, eval(f, d) - slope * d, side};
}

// Sigmoid and tanh are convex below 0 and concave above. When the interval
// straddles 0, the upper line is the tangent at some d in [0, u] that passes
// through (l, f(l)) if such d exists, else the chord; the lower line mirrors it.
BoundingLine straddle_upper(ScalarFn f, double l, double u) {
  const double fl = eval(f, l);
  auto reaches = [&](double d) { return eval(f, d) + derivative(f, d) * (l - d) >= fl; };
  if (!reaches(u)) return chord(f, l, u, Side::Upper);
  double infeasible = 0.0;
  double feasible = u;
  for (int it = 0; it < kBisectionSteps; ++it) {
    const double mid = 0.5 * (infeasible + feasible);
    (reaches(mid) ? feasible : infeasible) = mid;
  }
  return tangent(f, feasible, Side::Upper);
}

BoundingLine straddle_lower(ScalarFn f, double l, double u) {
  const double fu = eval(f, u);
  auto reaches = [&](double d) { return eval(f, d) + derivative(f, d) * (u - d) <= fu; };
  if (!reaches(l)) return chord(f, l, u, Side::Lower);
  double infeasible = 0.0;
  double feasible = l;
  for (int it = 0; it < kBisectionSteps; ++it) {
    const double mid = 0.5 * (infeasible + feasible);
    (reaches(mid) ? feasible : infeasible) = mid;
  }
  return tangent(f, feasible, Side::Lower);
}

void verify(ScalarFn f, double l, double u, BoundingLine& line) {
  double worst = 0.0;
  for (int i = 0; i < kVerifyPoints; ++i) {
    const double v = l + (u - l) * static_cast<double>(i) / (kVerifyPoints - 1);
    const double gap = line.side == Side::Upper ? eval(f, v) - line(v) : line(v) - eval(f, v);
    worst = std::max(worst, gap);
  }
  if (worst > kVerifyPad) {
    const double shift = worst + kVerifyPad;
    line.intercept += line.side == Side::Upper ? shift : -shift;
  }
}

}  // namespace

LinePair bound_activation(ScalarFn f, double l, double u) {
  if (!std::isfinite(l) || !std::isfinite(u)) throw IntervalError("interval endpoints must be finite");
  if (l > u) throw IntervalError("interval lower end exceeds upper end");

  if (u - l < kDegenerateWidth) {
    // f is increasing, so constants f(u) and f(l) are exact and sound.
    return {{0.0, eval(f, u), Side::Upper}, {0.0, eval(f, l), Side::Lower}};
  }

  LinePair lines;
  const double mid = 0.5 * (l + u);
  if (l >= 0.0) {
    lines.upper = tangent(f, mid, Side::Upper);
    lines.lower = chord(f, l, u, Side::Lower);
  } else if (u <= 0.0) {
    lines.upper = chord(f, l, u, Side::Upper);
    lines.lower = tangent(f, mid, Side::Lower);
  } else {
    lines.upper = straddle_upper(f, l, u);
    lines.lower = straddle_lower(f, l, u);
  }
  verify(f, l, u, lines.upper);
  verify(f, l, u, lines.lower);
  return lines;
}

}  // namespace rnncert
