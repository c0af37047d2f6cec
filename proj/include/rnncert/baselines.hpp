#pragma once

// Attacks (upper bounds on the minimal adversarial distortion) and the
// CLEVER-RNN robustness estimate. Distortion is always the largest
// per-frame lp norm of the perturbation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnncert/model.hpp"

namespace rnncert {

/// Grid attack asked to enumerate too many dimensions.
class DimensionalityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kGridMaxDims = 6;

struct AttackResult {
  std::string kind;
  bool success = false;
  double distortion = 0.0;
  std::vector<Vector> adversarial;  // empty unless success
  std::size_t evaluations = 0;      // forward or gradient evaluations
};

/// max_{i != label} F_i(X) - F_label(X); positive means misclassified.
double attack_margin(const RecurrentModel& model, const std::vector<Vector>& frames, std::size_t label);

/// Largest per-frame lp norm of frames - x0.
double frame_distortion(const std::vector<Vector>& frames, const std::vector<Vector>& x0, double p);

/// Enumerates `resolution` points per perturbed coordinate in [-eps, eps],
/// keeps those inside the per-frame balls and returns the misclassifying
/// point of least distortion. With single_frame set only that frame moves.
AttackResult grid_attack(const RecurrentModel& model, const std::vector<Vector>& x0, std::size_t label,
                         double p, double epsilon, std::size_t resolution,
                         std::optional<std::size_t> single_frame = std::nullopt);

struct GradientAttackConfig {
  std::size_t max_steps = 500;     // total gradient evaluations
  std::size_t inner_steps = 20;    // per projected-gradient run
  double initial_radius = 0.01;
  double max_radius = 100.0;
  std::size_t restarts = 1;        // extra random starts per radius in phase 1
  std::uint64_t seed = 0;
};

/// Phase 1 grows the radius until projected gradient ascent on the margin
/// misclassifies; phase 2 bisects the radius down keeping a misclassifying
/// point, then scales the best perturbation down as far as it stays
/// adversarial.
AttackResult gradient_attack(const RecurrentModel& model, const std::vector<Vector>& x0,
                             std::size_t label, double p, const GradientAttackConfig& cfg = {});

struct CleverEstimate {
  double score = 0.0;
  std::optional<std::size_t> target;  // the class achieving the minimum
  double margin = 0.0;                // g(X0) for that class
  std::vector<double> lipschitz;      // per-frame max ||grad_t g||_q
  std::size_t samples = 0;
};

/// min(g(X0) / sum_t L_t, eps0), clipped at 0. With no target, the minimum
/// over all classes other than the label.
CleverEstimate clever_rnn(const RecurrentModel& model, const std::vector<Vector>& x0,
                          std::size_t label, std::optional<std::size_t> target, double p,
                          double eps0 = 1.0, std::size_t n_samples = 1024, std::uint64_t seed = 0);

nlohmann::ordered_json to_json(const AttackResult& r, double p);
nlohmann::ordered_json to_json(const CleverEstimate& c, double p);

}  // namespace rnncert
