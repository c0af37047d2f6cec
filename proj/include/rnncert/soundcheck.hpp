#pragma once

// Empirical containment check of global bounds: sample the perturbation set
// (and optionally enumerate a grid over it) and count outputs that fall
// outside [gamma_L, gamma_U].

#include <cstddef>
#include <cstdint>

#include <json.hpp>

#include "rnncert/propagation.hpp"

namespace rnncert {

struct SoundcheckReport {
  std::size_t samples = 0;
  std::size_t grid_points = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;  // largest amount by which an output left its bounds
  GlobalBounds bounds;
};

/// Half the samples are drawn uniformly from the balls and half from their
/// surfaces. When grid_resolution > 0 and the perturbed coordinates number
/// at most max_grid_dims, a full grid over the balls is also enumerated.
SoundcheckReport soundcheck(const RecurrentModel& model, const std::vector<Vector>& x0,
                            const PerturbationSpec& spec, const PropagationOptions& options,
                            std::size_t n_samples, std::size_t grid_resolution, std::uint64_t seed,
                            std::size_t max_grid_dims = 4);

/// Same check against bounds already computed.
SoundcheckReport soundcheck_bounds(const RecurrentModel& model, const std::vector<Vector>& x0,
                                   const PerturbationSpec& spec, const GlobalBounds& bounds,
                                   std::size_t n_samples, std::size_t grid_resolution,
                                   std::uint64_t seed, std::size_t max_grid_dims = 4);

nlohmann::ordered_json to_json(const SoundcheckReport& r);

}  // namespace rnncert
