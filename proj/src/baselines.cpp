#include "rnncert/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rnncert/ball.hpp"
#include "rnncert/random.hpp"

namespace rnncert {

double attack_margin(const RecurrentModel& model, const std::vector<Vector>& frames, std::size_t label) {
  const Vector out = forward(model, frames);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i != label) best = std::max(best, out[i]);
  }
  return best - out[label];
}

double frame_distortion(const std::vector<Vector>& frames, const std::vector<Vector>& x0, double p) {
  double worst = 0.0;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    worst = std::max(worst, lp_norm(subtract(frames[k], x0[k]), p));
  }
  return worst;
}

AttackResult grid_attack(const RecurrentModel& model, const std::vector<Vector>& x0, std::size_t label,
                         double p, double epsilon, std::size_t resolution,
                         std::optional<std::size_t> single_frame) {
  model.validate();
  if (x0.size() != model.m) throw ShapeError("sequence length does not match model steps");
  if (single_frame && (*single_frame < 1 || *single_frame > model.m)) {
    throw std::invalid_argument("frame index out of range");
  }
  if (resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
  const std::size_t first = single_frame ? *single_frame - 1 : 0;
  const std::size_t count = single_frame ? 1 : model.m;
  const std::size_t dims = count * model.n;
  if (dims > kGridMaxDims) {
    throw DimensionalityError("grid attack over " + std::to_string(dims) + " dimensions refused (limit " +
                              std::to_string(kGridMaxDims) + ")");
  }

  AttackResult res;
  res.kind = "grid";
  std::vector<std::size_t> idx(dims, 0);
  std::vector<Vector> frames = x0;
  const double step = 2.0 * epsilon / static_cast<double>(resolution - 1);
  const double slack = 1e-12 * std::max(1.0, epsilon);
  for (;;) {
    for (std::size_t d = 0; d < dims; ++d) {
      frames[first + d / model.n][d % model.n] =
          x0[first + d / model.n][d % model.n] - epsilon + step * static_cast<double>(idx[d]);
    }
    const double dist = frame_distortion(frames, x0, p);
    if (dist <= epsilon + slack && (!res.success || dist < res.distortion)) {
      ++res.evaluations;
      if (attack_margin(model, frames, label) > 0.0) {
        res.success = true;
        res.distortion = dist;
        res.adversarial = frames;
      }
    }
    std::size_t d = 0;
    while (d < dims && ++idx[d] == resolution) idx[d++] = 0;
    if (d == dims) break;
  }
  return res;
}

namespace {

struct Ascent {
  const RecurrentModel& model;
  const std::vector<Vector>& x0;
  std::size_t label;
  double p;
  std::size_t budget;
  std::size_t used = 0;

  bool exhausted() const { return used >= budget; }

  /// Gradient of the current margin with respect to each frame.
  std::vector<Vector> margin_gradient(const std::vector<Vector>& frames) {
    const Vector out = forward(model, frames);
    std::size_t best = label == 0 ? 1 : 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (i != label && out[i] > out[best]) best = i;
    }
    Vector w(out.size());
    w[best] = 1.0;
    w[label] = -1.0;
    ++used;
    return input_gradient(model, frames, w);
  }

  std::vector<Vector> project(const std::vector<Vector>& delta, double radius) const {
    std::vector<Vector> out;
    out.reserve(delta.size());
    for (const auto& d : delta) out.push_back(project_ball(d, p, radius));
    return out;
  }

  std::vector<Vector> apply(const std::vector<Vector>& delta) const {
    std::vector<Vector> frames = x0;
    for (std::size_t k = 0; k < frames.size(); ++k) add_in_place(frames[k], delta[k]);
    return frames;
  }

  /// Projected gradient ascent from `delta` inside per-frame balls of
  /// `radius`; returns the first misclassifying perturbation found.
  std::optional<std::vector<Vector>> run(std::vector<Vector> delta, double radius, std::size_t steps) {
    const double lr = 2.5 * radius / static_cast<double>(steps);
    delta = project(delta, radius);
    for (std::size_t it = 0; it < steps && !exhausted(); ++it) {
      const auto frames = apply(delta);
      if (attack_margin(model, frames, label) > 0.0) return delta;
      const auto grad = margin_gradient(frames);
      for (std::size_t k = 0; k < delta.size(); ++k) {
        Vector g = grad[k];
        if (std::isinf(p)) {
          for (double& v : g) v = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        } else {
          const double norm = lp_norm(g, 2.0);
          if (norm > 0.0) {
            for (double& v : g) v /= norm;
          }
        }
        for (std::size_t i = 0; i < g.size(); ++i) delta[k][i] += lr * g[i];
      }
      delta = project(delta, radius);
    }
    if (attack_margin(model, apply(delta), label) > 0.0) return delta;
    return std::nullopt;
  }
};

std::vector<Vector> scaled(const std::vector<Vector>& delta, double factor) {
  std::vector<Vector> out = delta;
  for (auto& d : out) {
    for (double& v : d) v *= factor;
  }
  return out;
}

}  // namespace

AttackResult gradient_attack(const RecurrentModel& model, const std::vector<Vector>& x0,
                             std::size_t label, double p, const GradientAttackConfig& cfg) {
  model.validate();
  if (x0.size() != model.m) throw ShapeError("sequence length does not match model steps");
  if (label >= model.t) throw std::invalid_argument("label out of range");
  dual_exponent(p);

  AttackResult res;
  res.kind = "gradient";
  Ascent asc{model, x0, label, p, cfg.max_steps};
  Rng rng(cfg.seed);
  const std::vector<Vector> zero(model.m, Vector(model.n));

  if (attack_margin(model, x0, label) > 0.0) {
    res.success = true;
    res.adversarial = x0;
    res.evaluations = 1;
    return res;
  }

  // Phase 1: find any adversarial point.
  std::optional<std::vector<Vector>> best;
  double lo = 0.0;
  double hi = cfg.initial_radius;
  while (!best && hi <= cfg.max_radius && !asc.exhausted()) {
    best = asc.run(zero, hi, cfg.inner_steps);
    for (std::size_t r = 0; r < cfg.restarts && !best && !asc.exhausted(); ++r) {
      std::vector<Vector> start;
      for (std::size_t k = 0; k < model.m; ++k) start.push_back(sample_ball(rng, model.n, p, hi));
      best = asc.run(start, hi, cfg.inner_steps);
    }
    if (!best) {
      lo = hi;
      hi *= 2.0;
    }
  }
  if (!best) {
    res.evaluations = asc.used;
    return res;
  }

  // Phase 2: shrink the radius while an adversarial point can be kept.
  hi = std::min(hi, frame_distortion(asc.apply(*best), x0, p));
  while (!asc.exhausted() && hi - lo > 1e-6 * std::max(hi, 1e-12)) {
    const double mid = 0.5 * (lo + hi);
    const double factor = hi > 0.0 ? mid / hi : 0.0;
    auto found = asc.run(scaled(*best, factor), mid, cfg.inner_steps);
    if (found) {
      best = found;
      hi = std::min(mid, frame_distortion(asc.apply(*found), x0, p));
    } else {
      lo = mid;
    }
  }

  // Final shrink: scale the perturbation down while it stays adversarial.
  double keep = 1.0;
  double drop = 0.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (keep + drop);
    ++asc.used;
    (attack_margin(model, asc.apply(scaled(*best, mid)), label) > 0.0 ? keep : drop) = mid;
  }
  const auto frames = asc.apply(scaled(*best, keep));
  res.success = true;
  res.adversarial = frames;
  res.distortion = frame_distortion(frames, x0, p);
  res.evaluations = asc.used;
  return res;
}

CleverEstimate clever_rnn(const RecurrentModel& model, const std::vector<Vector>& x0,
                          std::size_t label, std::optional<std::size_t> target, double p, double eps0,
                          std::size_t n_samples, std::uint64_t seed) {
  model.validate();
  if (x0.size() != model.m) throw ShapeError("sequence length does not match model steps");
  if (label >= model.t) throw std::invalid_argument("label out of range");
  if (target && (*target >= model.t || *target == label)) throw std::invalid_argument("invalid target class");
  const double q = dual_exponent(p);

  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < model.t; ++i) {
    if (i != label && (!target || *target == i)) targets.push_back(i);
  }
  std::vector<std::vector<double>> lip(targets.size(), std::vector<double>(model.m, 0.0));
  Rng rng(seed);
  for (std::size_t sample = 0; sample < n_samples; ++sample) {
    std::vector<Vector> frames = x0;
    for (auto& f : frames) add_in_place(f, sample_ball(rng, model.n, p, eps0));
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      Vector w(model.t);
      w[label] = 1.0;
      w[targets[ti]] = -1.0;
      const auto grad = input_gradient(model, frames, w);
      for (std::size_t k = 0; k < model.m; ++k) lip[ti][k] = std::max(lip[ti][k], lp_norm(grad[k], q));
    }
  }

  const Vector out = forward(model, x0);
  CleverEstimate est;
  est.samples = n_samples;
  est.score = std::numeric_limits<double>::infinity();
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    const double g = out[label] - out[targets[ti]];
    double total = 0.0;
    for (double l : lip[ti]) total += l;
    double score;
    if (g <= 0.0) {
      score = 0.0;
    } else if (total <= 0.0) {
      score = eps0;
    } else {
      score = std::min(g / total, eps0);
    }
    if (score < est.score) {
      est.score = score;
      est.target = targets[ti];
      est.margin = g;
      est.lipschitz = lip[ti];
    }
  }
  if (targets.empty()) est.score = eps0;
  return est;
}

nlohmann::ordered_json to_json(const AttackResult& r, double p) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind;
  j["p"] = format_norm(p);
  j["success"] = r.success;
  j["distortion"] = r.distortion;
  j["evaluations"] = r.evaluations;
  auto& adv = j["adversarial"] = nlohmann::ordered_json::array();
  for (const auto& f : r.adversarial) adv.push_back(f.values());
  return j;
}

nlohmann::ordered_json to_json(const CleverEstimate& c, double p) {
  nlohmann::ordered_json j;
  j["p"] = format_norm(p);
  j["score"] = c.score;
  if (c.target) j["target"] = *c.target;
  j["margin"] = c.margin;
  j["lipschitz"] = c.lipschitz;
  j["samples"] = c.samples;
  return j;
}

}  // namespace rnncert
