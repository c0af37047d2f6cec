#include "rnncert/soundcheck.hpp"

#include <algorithm>

#include "rnncert/ball.hpp"
#include "rnncert/random.hpp"

namespace rnncert {

namespace {

void tally(const Vector& out, const GlobalBounds& b, SoundcheckReport& rep) {
  bool bad = false;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double excess = std::max(b.gamma_L[j] - out[j], out[j] - b.gamma_U[j]);
    if (excess > 0.0) {
      bad = true;
      rep.worst_excess = std::max(rep.worst_excess, excess);
    }
  }
  if (bad) ++rep.violations;
}

}  // namespace

SoundcheckReport soundcheck_bounds(const RecurrentModel& model, const std::vector<Vector>& x0,
                                   const PerturbationSpec& spec, const GlobalBounds& bounds,
                                   std::size_t n_samples, std::size_t grid_resolution,
                                   std::uint64_t seed, std::size_t max_grid_dims) {
  SoundcheckReport rep;
  rep.bounds = bounds;
  const std::vector<double> radii = spec.radii(model.m);
  std::vector<std::size_t> moving;
  for (std::size_t k = 0; k < model.m; ++k) {
    if (radii[k] > 0.0) moving.push_back(k);
  }

  tally(forward(model, x0), bounds, rep);
  ++rep.samples;

  Rng rng(seed);
  std::vector<Vector> frames = x0;
  for (std::size_t i = 0; i < n_samples && !moving.empty(); ++i) {
    const bool surface = i % 2 == 1;
    for (std::size_t k : moving) {
      frames[k] = add(x0[k], surface ? sample_sphere(rng, model.n, spec.p, radii[k])
                                     : sample_ball(rng, model.n, spec.p, radii[k]));
    }
    tally(forward(model, frames), bounds, rep);
    ++rep.samples;
  }

  const std::size_t dims = moving.size() * model.n;
  if (grid_resolution >= 2 && dims > 0 && dims <= max_grid_dims) {
    std::vector<std::size_t> idx(dims, 0);
    frames = x0;
    for (;;) {
      bool inside = true;
      for (std::size_t mi = 0; mi < moving.size(); ++mi) {
        const std::size_t k = moving[mi];
        const double r = radii[k];
        Vector d(model.n);
        for (std::size_t c = 0; c < model.n; ++c) {
          d[c] = -r + 2.0 * r * static_cast<double>(idx[mi * model.n + c]) /
                          static_cast<double>(grid_resolution - 1);
        }
        if (lp_norm(d, spec.p) > r * (1.0 + 1e-12)) {
          inside = false;
          break;
        }
        frames[k] = add(x0[k], d);
      }
      if (inside) {
        tally(forward(model, frames), bounds, rep);
        ++rep.grid_points;
      }
      std::size_t d = 0;
      while (d < dims && ++idx[d] == grid_resolution) idx[d++] = 0;
      if (d == dims) break;
    }
  }
  return rep;
}

SoundcheckReport soundcheck(const RecurrentModel& model, const std::vector<Vector>& x0,
                            const PerturbationSpec& spec, const PropagationOptions& options,
                            std::size_t n_samples, std::size_t grid_resolution, std::uint64_t seed,
                            std::size_t max_grid_dims) {
  const GlobalBounds b = compute_global_bounds(model, x0, spec, options);
  return soundcheck_bounds(model, x0, spec, b, n_samples, grid_resolution, seed, max_grid_dims);
}

nlohmann::ordered_json to_json(const SoundcheckReport& r) {
  nlohmann::ordered_json j;
  j["samples"] = r.samples;
  j["grid_points"] = r.grid_points;
  j["violations"] = r.violations;
  j["worst_excess"] = r.worst_excess;
  j["gamma_L"] = r.bounds.gamma_L.values();
  j["gamma_U"] = r.bounds.gamma_U.values();
  return j;
}

}  // namespace rnncert
