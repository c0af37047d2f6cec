#pragma once

// Sampling from and projecting onto lp balls centred at the origin.

#include <cstddef>

#include "rnncert/numeric.hpp"
#include "rnncert/random.hpp"

namespace rnncert {

/// Uniform sample from {d : ||d||_p <= radius}. p must be 1, 2 or inf.
Vector sample_ball(Rng& rng, std::size_t dim, double p, double radius);

/// Uniform-direction sample on the sphere {d : ||d||_p = radius}.
Vector sample_sphere(Rng& rng, std::size_t dim, double p, double radius);

/// Euclidean projection of v onto {d : ||d||_p <= radius}; l2 uses radial
/// scaling, linf clipping, l1 the sorting-based simplex projection.
Vector project_ball(const Vector& v, double p, double radius);

}  // namespace rnncert
