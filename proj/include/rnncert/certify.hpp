#pragma once

// Certified radii by binary search over epsilon.
//
// Untargeted: largest eps with gamma_L[j] >= gamma_U[i] for every i != j.
// Targeted:   the same predicate for a single class i.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnncert/model.hpp"
#include "rnncert/propagation.hpp"

namespace rnncert {

struct SearchConfig {
  double eps0 = 0.01;
  double tol = 1e-4;
  std::size_t max_iter = 30;
  std::size_t max_doublings = 20;  // growth stops at eps0 * 2^max_doublings
};

struct Probe {
  double epsilon = 0.0;
  bool feasible = false;
};

struct ClassMargin {
  std::size_t cls = 0;
  double margin = 0.0;  // gamma_L[label] - gamma_U[cls]
};

struct CertificationResult {
  std::size_t label = 0;
  std::optional<std::size_t> target;        // empty for untargeted
  std::optional<std::size_t> single_frame;  // empty for all frames
  double p = kInfNorm;
  std::size_t m = 0;
  CrossStrategy strategy = CrossStrategy::Planes2D;

  double certified_epsilon = 0.0;
  std::size_t iterations = 0;   // bisection steps
  std::size_t evaluations = 0;  // predicate calls
  double final_interval_width = 0.0;
  std::vector<ClassMargin> margins;  // at certified_epsilon
  std::vector<Probe> probes;

  bool misclassified = false;
  bool non_monotone = false;
  bool hit_cap = false;
  bool verified = false;  // post-hoc fresh re-check at certified_epsilon

  /// m^(1/p) * eps for all-frame certificates, eps otherwise.
  double overall_distortion() const;
};

/// The feasibility predicate with its margins; exposed for re-checks.
bool certificate_holds(const RecurrentModel& model, const std::vector<Vector>& x0, std::size_t label,
                       std::optional<std::size_t> target, const PerturbationSpec& spec,
                       const PropagationOptions& options = {},
                       std::vector<ClassMargin>* margins = nullptr);

CertificationResult certify_untargeted(const RecurrentModel& model, const std::vector<Vector>& x0,
                                       std::size_t label, double p,
                                       std::optional<std::size_t> single_frame,
                                       CrossStrategy strategy, const SearchConfig& cfg = {});

CertificationResult certify_targeted(const RecurrentModel& model, const std::vector<Vector>& x0,
                                     std::size_t label, std::size_t target, double p,
                                     std::optional<std::size_t> single_frame,
                                     CrossStrategy strategy, const SearchConfig& cfg = {});

/// One untargeted certificate per frame, ordered by frame.
std::vector<CertificationResult> certify_per_frame(const RecurrentModel& model,
                                                   const std::vector<Vector>& x0, std::size_t label,
                                                   double p, CrossStrategy strategy,
                                                   const SearchConfig& cfg = {});

nlohmann::ordered_json to_json(const CertificationResult& r);

/// "frame_index,epsilon" header plus one row per frame (1-based).
std::string per_frame_csv(const std::vector<CertificationResult>& results);

}  // namespace rnncert
