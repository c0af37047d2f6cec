#pragma once

// Backward linear bound propagation through time.
//
// A linear form over the state at step k (hidden a(k), cell c(k)) plus the
// frames already substituted is pushed back one step at a time: every
// nonlinearity at step k is replaced by a bounding line or plane, chosen per
// row by the sign of its coefficient, and the gate pre-activations are then
// expanded into a(k-1), c(k-1) and x(k). At step 0 the form is linear in the
// frames only and Hoelder's inequality gives its extremes over the ball.
//
// Pre-activation bounds for step k are obtained with the same machinery by
// treating each gate pre-activation (and hidden/cell state) as an output.

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rnncert/model.hpp"
#include "rnncert/plane_bounds.hpp"
#include "rnncert/scalar_bounds.hpp"

namespace rnncert {

/// Raised when a bound becomes non-finite or exceeds 1e12 in magnitude.
class NumericalOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kOverflowLimit = 1e12;

struct IntervalVec {
  Vector lower;
  Vector upper;
};

struct StepBounds {
  std::array<std::optional<IntervalVec>, kGateCount> gates;
  IntervalVec hidden;
  IntervalVec cell;  // LSTM only

  const IntervalVec& gate(Gate g) const;
  bool has(Gate g) const { return gates[static_cast<std::size_t>(g)].has_value(); }
};

struct PreActivationBounds {
  IntervalVec hidden0;
  IntervalVec cell0;
  std::vector<StepBounds> steps;  // steps[k-1] is step k

  /// k in 0..m; k = 0 is the (exact) initial state.
  const IntervalVec& hidden(std::size_t k) const { return k == 0 ? hidden0 : steps[k - 1].hidden; }
  const IntervalVec& cell(std::size_t k) const { return k == 0 ? cell0 : steps[k - 1].cell; }
};

struct GlobalBounds {
  Vector gamma_L;
  Vector gamma_U;
};

/// L(X) = coef_a . a(step) + coef_c . c(step) + sum_k coef_x[k] . x(k) + bias,
/// one row per bounded quantity. coef_x[k-1] holds frame k.
struct LinearForm {
  std::size_t step = 0;
  Side side = Side::Upper;
  Matrix coef_a;
  Matrix coef_c;
  std::vector<Matrix> coef_x;
  Vector bias;
};

struct PropagationOptions {
  CrossStrategy strategy = CrossStrategy::Planes2D;
  PlaneCache* cache = &PlaneCache::global();  // nullptr disables memoisation
};

PreActivationBounds compute_preactivation_bounds(const RecurrentModel& model,
                                                 const std::vector<Vector>& x0,
                                                 const PerturbationSpec& spec,
                                                 const PropagationOptions& options = {});

GlobalBounds propagate_vanilla(const RecurrentModel& model, const std::vector<Vector>& x0,
                               const PerturbationSpec& spec, const PreActivationBounds& bounds);
GlobalBounds propagate_lstm(const RecurrentModel& model, const std::vector<Vector>& x0,
                            const PerturbationSpec& spec, const PreActivationBounds& bounds,
                            const PropagationOptions& options = {});
GlobalBounds propagate_gru(const RecurrentModel& model, const std::vector<Vector>& x0,
                           const PerturbationSpec& spec, const PreActivationBounds& bounds,
                           const PropagationOptions& options = {});

/// Dispatches on the model kind.
GlobalBounds propagate(const RecurrentModel& model, const std::vector<Vector>& x0,
                       const PerturbationSpec& spec, const PreActivationBounds& bounds,
                       const PropagationOptions& options = {});

/// Pre-activation bounds followed by output propagation.
GlobalBounds compute_global_bounds(const RecurrentModel& model, const std::vector<Vector>& x0,
                                   const PerturbationSpec& spec,
                                   const PropagationOptions& options = {});

/// The output forms after each backward substitution: element i holds the
/// form over the state at step m - i, so the last element is over the
/// frames and a(0), c(0) only.
std::vector<LinearForm> output_forms(const RecurrentModel& model, const std::vector<Vector>& x0,
                                     const PerturbationSpec& spec, const PreActivationBounds& bounds,
                                     Side side, const PropagationOptions& options = {});

/// Evaluates row `row` of a form at an input, using the true hidden/cell
/// states of that input for the unsubstituted part.
double evaluate_form(const LinearForm& form, std::size_t row, const RecurrentModel& model,
                     const ForwardTrace& trace, const std::vector<Vector>& frames);

}  // namespace rnncert
