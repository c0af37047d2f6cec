#pragma once

// Reference implementations kept separate from the library code paths:
// a loop-only forward pass and an lp-ball sampler built on the standard
// distributions.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "rnncert/model.hpp"

namespace oracle {

using rnncert::RecurrentModel;
using rnncert::Vector;
using Frames = std::vector<Vector>;

inline double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Step-by-step forward pass written directly from the cell equations.
std::vector<double> forward(const RecurrentModel& model, const Frames& x);

/// Gradient of w . F by central differences with step h.
Frames finite_difference(const RecurrentModel& model, const Frames& x, const Vector& w, double h = 1e-5);

class BallSampler {
 public:
  explicit BallSampler(std::uint64_t seed) : gen_(seed) {}
  /// Uniform in the lp ball (surface == false) or on its sphere.
  std::vector<double> draw(std::size_t dim, double p, double radius, bool surface);

 private:
  std::mt19937_64 gen_;
};

/// Calls f(delta) for every point of a `res`-per-axis grid over [-r, r]^dim
/// that lies inside the lp ball of radius r.
void for_each_grid_point(std::size_t dim, std::size_t res, double p, double r,
                         const std::function<void(const std::vector<double>&)>& f);

double lp(const std::vector<double>& v, double p);

}  // namespace oracle
