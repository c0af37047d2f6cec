#include "rnncert/ball.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace rnncert {

namespace {

void check_norm(double p) {
  if (!(p == 1.0 || p == 2.0 || std::isinf(p))) {
    throw InvalidNorm("ball routines support p in {1, 2, inf}");
  }
}

}  // namespace

Vector sample_ball(Rng& rng, std::size_t dim, double p, double radius) {
  check_norm(p);
  Vector d(dim);
  if (dim == 0 || radius == 0.0) return d;
  if (std::isinf(p)) {
    for (auto& x : d) x = rng.uniform(-radius, radius);
    return d;
  }
  if (p == 2.0) {
    d = sample_sphere(rng, dim, 2.0, 1.0);
    const double scale = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
    for (auto& x : d) x *= scale;
    return d;
  }
  // l1: normalised exponentials with one slack coordinate give a uniform
  // point of the simplex; random signs fill the cross-polytope.
  double total = rng.exponential();
  std::vector<double> e(dim);
  for (auto& x : e) {
    x = rng.exponential();
    total += x;
  }
  for (std::size_t i = 0; i < dim; ++i) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    d[i] = sign * radius * e[i] / total;
  }
  return d;
}

Vector sample_sphere(Rng& rng, std::size_t dim, double p, double radius) {
  check_norm(p);
  Vector d(dim);
  if (dim == 0) return d;
  if (std::isinf(p)) {
    for (auto& x : d) x = rng.uniform(-radius, radius);
    const std::size_t face = static_cast<std::size_t>(rng.uniform() * static_cast<double>(dim));
    d[std::min(face, dim - 1)] = rng.uniform() < 0.5 ? -radius : radius;
    return d;
  }
  if (p == 2.0) {
    double n = 0.0;
    do {
      for (auto& x : d) x = rng.normal();
      n = lp_norm(d, 2.0);
    } while (n == 0.0);
    for (auto& x : d) x *= radius / n;
    return d;
  }
  double total = 0.0;
  for (auto& x : d) {
    x = rng.exponential();
    total += x;
  }
  for (auto& x : d) x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * radius * x / total;
  return d;
}

Vector project_ball(const Vector& v, double p, double radius) {
  check_norm(p);
  Vector d = v;
  if (radius <= 0.0) return Vector(v.size());
  if (std::isinf(p)) {
    for (auto& x : d) x = std::clamp(x, -radius, radius);
    return d;
  }
  const double n = lp_norm(v, p);
  if (n <= radius) return d;
  if (p == 2.0) {
    for (auto& x : d) x *= radius / n;
    return d;
  }
  // Project |v| onto the simplex of size radius, then restore signs.
  std::vector<double> mags(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) mags[i] = std::abs(v[i]);
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double t = (cumulative - radius) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) theta = t;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double m = std::max(mags[i] - theta, 0.0);
    d[i] = v[i] < 0.0 ? -m : m;
  }
  // Guard against rounding pushing the result just outside.
  const double after = lp_norm(d, 1.0);
  if (after > radius) {
    for (auto& x : d) x *= radius / after;
  }
  return d;
}

}  // namespace rnncert
