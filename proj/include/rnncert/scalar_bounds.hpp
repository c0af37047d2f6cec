#pragma once

// Linear upper/lower bounds for sigmoid and tanh on an interval.

#include <stdexcept>

namespace rnncert {

class IntervalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Side { Upper, Lower };
enum class ScalarFn { Sigmoid, Tanh };

double eval(ScalarFn f, double v);
double derivative(ScalarFn f, double v);

/// h(v) = slope * v + intercept. Equivalent to slope * (v + shift()) whenever
/// the slope is non-zero.
struct BoundingLine {
  double slope = 0.0;
  double intercept = 0.0;
  Side side = Side::Upper;

  double operator()(double v) const { return slope * v + intercept; }
  double shift() const { return slope == 0.0 ? 0.0 : intercept / slope; }
};

struct LinePair {
  BoundingLine upper;
  BoundingLine lower;
};

/// Sound lines with lower(v) <= f(v) <= upper(v) on [l, u].
/// Throws IntervalError when l > u or an endpoint is not finite.
LinePair bound_activation(ScalarFn f, double l, double u);

}  // namespace rnncert
