#include "rnncert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rnncert {

double CertificationResult::overall_distortion() const {
  if (single_frame || std::isinf(p)) return certified_epsilon;
  return std::pow(static_cast<double>(m), 1.0 / p) * certified_epsilon;
}

bool certificate_holds(const RecurrentModel& model, const std::vector<Vector>& x0, std::size_t label,
                       std::optional<std::size_t> target, const PerturbationSpec& spec,
                       const PropagationOptions& options, std::vector<ClassMargin>* margins) {
  const GlobalBounds g = compute_global_bounds(model, x0, spec, options);
  bool ok = true;
  if (margins) margins->clear();
  for (std::size_t i = 0; i < model.t; ++i) {
    if (i == label || (target && *target != i)) continue;
    const double margin = g.gamma_L[label] - g.gamma_U[i];
    if (!(margin >= 0.0)) ok = false;
    if (margins) margins->push_back({i, margin});
  }
  return ok;
}

namespace {

void check_args(const RecurrentModel& model, const std::vector<Vector>& x0, std::size_t label,
                std::optional<std::size_t> target, std::optional<std::size_t> frame,
                const SearchConfig& cfg) {
  model.validate();
  if (x0.size() != model.m) throw ShapeError("sequence length does not match model steps");
  if (label >= model.t) throw std::invalid_argument("label out of range");
  if (target && (*target >= model.t || *target == label)) throw std::invalid_argument("invalid target class");
  if (frame && (*frame < 1 || *frame > model.m)) throw std::invalid_argument("frame index out of range");
  if (!(cfg.eps0 > 0.0) || !(cfg.tol > 0.0)) throw std::invalid_argument("eps0 and tol must be positive");
}

// Largest probed eps such that every probe at or below it was feasible.
double prefix_feasible(const std::vector<Probe>& probes, bool& non_monotone) {
  std::vector<Probe> sorted = probes;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Probe& a, const Probe& b) { return a.epsilon < b.epsilon; });
  double best = 0.0;
  bool blocked = false;
  non_monotone = false;
  for (const Probe& pr : sorted) {
    if (!pr.feasible) {
      blocked = true;
    } else if (blocked) {
      non_monotone = true;
    } else {
      best = pr.epsilon;
    }
  }
  return best;
}

CertificationResult search(const RecurrentModel& model, const std::vector<Vector>& x0,
                           std::size_t label, std::optional<std::size_t> target, double p,
                           std::optional<std::size_t> single_frame, CrossStrategy strategy,
                           const SearchConfig& cfg) {
  check_args(model, x0, label, target, single_frame, cfg);
  dual_exponent(p);  // validates p

  CertificationResult res;
  res.label = label;
  res.target = target;
  res.single_frame = single_frame;
  res.p = p;
  res.m = model.m;
  res.strategy = strategy;

  if (argmax(forward(model, x0)) != label) {
    res.misclassified = true;
    return res;
  }

  PropagationOptions options;
  options.strategy = strategy;
  auto spec_at = [&](double eps) {
    return single_frame ? PerturbationSpec::single(p, eps, *single_frame)
                        : PerturbationSpec::all_frames(p, eps);
  };
  auto probe = [&](double eps) {
    const bool ok = certificate_holds(model, x0, label, target, spec_at(eps), options);
    res.probes.push_back({eps, ok});
    ++res.evaluations;
    return ok;
  };

  const double cap = std::ldexp(cfg.eps0, static_cast<int>(cfg.max_doublings));
  double lo = 0.0;
  std::optional<double> hi;
  double eps = cfg.eps0;
  for (;;) {
    if (probe(eps)) {
      lo = eps;
      if (eps >= cap) {
        res.hit_cap = true;
        break;
      }
      eps *= 2.0;
    } else {
      hi = eps;
      break;
    }
  }
  if (hi) {
    while (*hi - lo > cfg.tol && res.iterations < cfg.max_iter) {
      const double mid = 0.5 * (lo + *hi);
      (probe(mid) ? lo : *hi) = mid;
      ++res.iterations;
    }
    res.final_interval_width = *hi - lo;
  }

  res.certified_epsilon = prefix_feasible(res.probes, res.non_monotone);

  PropagationOptions fresh = options;
  fresh.cache = nullptr;
  res.verified = certificate_holds(model, x0, label, target, spec_at(res.certified_epsilon), fresh,
                                   &res.margins);
  return res;
}

}  // namespace

CertificationResult certify_untargeted(const RecurrentModel& model, const std::vector<Vector>& x0,
                                       std::size_t label, double p,
                                       std::optional<std::size_t> single_frame,
                                       CrossStrategy strategy, const SearchConfig& cfg) {
  return search(model, x0, label, std::nullopt, p, single_frame, strategy, cfg);
}

CertificationResult certify_targeted(const RecurrentModel& model, const std::vector<Vector>& x0,
                                     std::size_t label, std::size_t target, double p,
                                     std::optional<std::size_t> single_frame,
                                     CrossStrategy strategy, const SearchConfig& cfg) {
  return search(model, x0, label, target, p, single_frame, strategy, cfg);
}

std::vector<CertificationResult> certify_per_frame(const RecurrentModel& model,
                                                   const std::vector<Vector>& x0, std::size_t label,
                                                   double p, CrossStrategy strategy,
                                                   const SearchConfig& cfg) {
  std::vector<CertificationResult> out;
  out.reserve(model.m);
  for (std::size_t k = 1; k <= model.m; ++k) {
    out.push_back(certify_untargeted(model, x0, label, p, k, strategy, cfg));
  }
  return out;
}

nlohmann::ordered_json to_json(const CertificationResult& r) {
  nlohmann::ordered_json j;
  j["mode"] = r.target ? "targeted" : "untargeted";
  j["label"] = r.label;
  if (r.target) j["target"] = *r.target;
  j["frames"] = r.single_frame ? nlohmann::ordered_json(*r.single_frame) : nlohmann::ordered_json("all");
  j["p"] = format_norm(r.p);
  j["strategy"] = to_string(r.strategy);
  j["certified_epsilon"] = r.certified_epsilon;
  j["overall_distortion"] = r.overall_distortion();
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["final_interval_width"] = r.final_interval_width;
  auto& margins = j["margins"] = nlohmann::ordered_json::array();
  for (const auto& m : r.margins) margins.push_back({{"class", m.cls}, {"margin", m.margin}});
  j["misclassified"] = r.misclassified;
  j["non_monotone"] = r.non_monotone;
  j["hit_cap"] = r.hit_cap;
  j["verified"] = r.verified;
  auto& probes = j["probes"] = nlohmann::ordered_json::array();
  for (const auto& pr : r.probes) probes.push_back({{"epsilon", pr.epsilon}, {"feasible", pr.feasible}});
  return j;
}

std::string per_frame_csv(const std::vector<CertificationResult>& results) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "frame_index,epsilon\n";
  for (std::size_t k = 0; k < results.size(); ++k) {
    const std::size_t frame = results[k].single_frame.value_or(k + 1);
    out << frame << ',' << results[k].certified_epsilon << '\n';
  }
  return out.str();
}

}  // namespace rnncert
