#pragma once

// Many-to-one recurrent classifiers (vanilla RNN, LSTM, GRU), their exact
// forward pass, and the JSON model / sequence file formats.
//
// Cell conventions (1-based step k, hidden a, cell c):
//   vanilla  a(k) = act(W_aa a(k-1) + W_ax x(k) + b_a)
//   LSTM     i, f, o = sigmoid(W_.x x(k) + W_.a a(k-1) + b_.)
//            g = tanh(W_gx x(k) + W_ga a(k-1) + b_g)
//            c(k) = f * c(k-1) + i * g,  a(k) = o * tanh(c(k))
//   GRU      r, z = sigmoid(W_.x x(k) + W_.a a(k-1) + b_.)
//            hn = W_na a(k-1) + b_na
//            n = tanh(W_nx x(k) + b_nx + r * hn)
//            a(k) = (1 - z) * n + z * a(k-1)
//   output   F(X) = W_Fa a(m) + b_F

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rnncert/numeric.hpp"

namespace rnncert {

/// Malformed or inconsistent model/sequence files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CellKind { Vanilla, Lstm, Gru };
enum class Activation { Tanh, Sigmoid };

std::string to_string(CellKind kind);
CellKind parse_cell_kind(const std::string& text);

double sigmoid(double v);

struct VanillaWeights {
  Activation activation = Activation::Tanh;
  Matrix W_aa, W_ax;
  Vector b_a;
  bool operator==(const VanillaWeights&) const = default;
};

struct LstmWeights {
  Matrix W_ix, W_ia, W_fx, W_fa, W_gx, W_ga, W_ox, W_oa;
  Vector b_i, b_f, b_g, b_o;
  bool operator==(const LstmWeights&) const = default;
};

struct GruWeights {
  Matrix W_rx, W_ra, W_zx, W_za, W_nx, W_na;
  Vector b_r, b_z, b_nx, b_na;
  bool operator==(const GruWeights&) const = default;
};

struct RecurrentModel {
  std::size_t n = 0;  // input frame size
  std::size_t s = 0;  // hidden size
  std::size_t m = 0;  // number of steps
  std::size_t t = 0;  // number of classes
  std::variant<VanillaWeights, LstmWeights, GruWeights> cell;
  Matrix W_Fa;
  Vector b_F;
  Vector a0;
  Vector c0;  // LSTM only; empty otherwise

  CellKind kind() const { return static_cast<CellKind>(cell.index()); }
  const VanillaWeights& vanilla() const { return std::get<VanillaWeights>(cell); }
  const LstmWeights& lstm() const { return std::get<LstmWeights>(cell); }
  const GruWeights& gru() const { return std::get<GruWeights>(cell); }
  VanillaWeights& vanilla() { return std::get<VanillaWeights>(cell); }
  LstmWeights& lstm() { return std::get<LstmWeights>(cell); }
  GruWeights& gru() { return std::get<GruWeights>(cell); }

  /// Throws ShapeError naming the first inconsistent field.
  void validate() const;

  bool operator==(const RecurrentModel&) const = default;
};

struct InputSequence {
  std::vector<Vector> frames;
  std::optional<std::size_t> label;

  bool operator==(const InputSequence&) const = default;
};

/// Threat model: every frame k lies in B_p(x0(k), radius_k). Uniform
/// perturbation uses radius epsilon on all frames; Single(k) perturbs
/// frame k (1-based) only.
struct PerturbationSpec {
  double p = kInfNorm;
  double epsilon = 0.0;
  std::optional<std::size_t> single_frame;

  static PerturbationSpec all_frames(double p, double epsilon) { return {p, epsilon, std::nullopt}; }
  static PerturbationSpec single(double p, double epsilon, std::size_t frame) {
    return {p, epsilon, frame};
  }

  /// Per-frame radii, length m. Throws std::invalid_argument on a bad frame index.
  std::vector<double> radii(std::size_t m) const;
};

/// Gate pre-activations tracked per step. Vanilla uses Y; LSTM I, F, G, O;
/// GRU R, Z, HN (W_na a + b_na) and N (the argument of the candidate tanh).
enum class Gate { Y, I, F, G, O, R, Z, HN, N };
inline constexpr std::size_t kGateCount = 9;

std::string to_string(Gate gate);
std::vector<Gate> gates_of(CellKind kind);

struct StepTrace {
  std::array<Vector, kGateCount> pre;
  Vector hidden;
  Vector cell;

  const Vector& gate(Gate g) const { return pre[static_cast<std::size_t>(g)]; }
  Vector& gate(Gate g) { return pre[static_cast<std::size_t>(g)]; }
};

struct ForwardTrace {
  std::vector<StepTrace> steps;  // steps[k-1] holds step k
  Vector output;
};

/// Exact forward pass with all intermediate values.
ForwardTrace forward_trace(const RecurrentModel& model, const std::vector<Vector>& frames);
Vector forward(const RecurrentModel& model, const std::vector<Vector>& frames);
inline Vector forward(const RecurrentModel& model, const InputSequence& x) {
  return forward(model, x.frames);
}

/// Index of the largest logit; ties resolve to the lowest index.
std::size_t argmax(const Vector& logits);

/// Reverse-mode gradient of w . F(X) with respect to every input frame.
std::vector<Vector> input_gradient(const RecurrentModel& model, const std::vector<Vector>& frames,
                                   const Vector& output_weights);

// ---- files ---------------------------------------------------------------

std::string model_to_json(const RecurrentModel& model);
RecurrentModel model_from_json(const std::string& text);
void save_model(const RecurrentModel& model, const std::filesystem::path& path);
RecurrentModel load_model(const std::filesystem::path& path);

std::string sequence_to_json(const InputSequence& seq);
InputSequence sequence_from_json(const std::string& text);
void save_sequence(const InputSequence& seq, const std::filesystem::path& path);
InputSequence load_sequence(const std::filesystem::path& path);
/// Checks frame count and width against the model.
void check_sequence(const RecurrentModel& model, const InputSequence& seq);

/// Deterministic in seed. Weights uniform in [-scale, scale]; scale <= 0
/// selects 1/sqrt(s). Initial states are zero.
RecurrentModel generate_random_model(std::uint64_t seed, CellKind kind, std::size_t n, std::size_t s,
                                     std::size_t m, std::size_t t, double weight_scale = 0.0,
                                     Activation activation = Activation::Tanh);

}  // namespace rnncert
