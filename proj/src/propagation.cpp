#include "rnncert/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rnncert {

const IntervalVec& StepBounds::gate(Gate g) const {
  const auto& slot = gates[static_cast<std::size_t>(g)];
  if (!slot) throw std::logic_error("no bounds recorded for gate " + to_string(g));
  return *slot;
}

namespace {

// Relaxations of every nonlinearity at one step. Empty vectors mean "not
// computed yet"; using one with a non-zero coefficient is a logic error.
struct StepRelaxation {
  std::vector<LinePair> act;            // vanilla
  std::vector<PlanePair> ig, fc, oc;    // LSTM
  std::vector<PlanePair> rhn, zn, zh;   // GRU
};

constexpr double kRoundingPad = 1e-12;

bool choose_upper(double coefficient, Side side) { return (coefficient >= 0.0) == (side == Side::Upper); }

const BoundingPlane& pick(const PlanePair& p, double coefficient, Side side) {
  return choose_upper(coefficient, side) ? p.upper : p.lower;
}

void require(const std::vector<PlanePair>& planes, std::size_t s, const char* what) {
  if (planes.size() != s) throw std::logic_error(std::string("relaxation '") + what + "' missing");
}

/// bias[j] += row_j(coef) . b
void add_bias(Vector& bias, const Matrix& coef, const Vector& b) {
  for (std::size_t j = 0; j < coef.rows(); ++j) bias[j] += dot(coef.row(j), b.span());
}

LinearForm make_form(std::size_t rows, const RecurrentModel& model, std::size_t step, Side side) {
  LinearForm f;
  f.step = step;
  f.side = side;
  f.coef_a = Matrix(rows, model.s);
  if (model.kind() == CellKind::Lstm) f.coef_c = Matrix(rows, model.s);
  f.coef_x.assign(model.m, Matrix(rows, model.n));
  f.bias = Vector(rows);
  return f;
}

void step_vanilla(const RecurrentModel& model, const StepRelaxation& rel, LinearForm& f) {
  const auto& w = model.vanilla();
  const std::size_t rows = f.coef_a.rows();
  const std::size_t s = model.s;
  if (rel.act.size() != s) throw std::logic_error("activation relaxation missing");
  Matrix cy(rows, s);
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::size_t r = 0; r < s; ++r) {
      const double lam = f.coef_a(j, r);
      if (lam == 0.0) continue;
      const BoundingLine& line = choose_upper(lam, f.side) ? rel.act[r].upper : rel.act[r].lower;
      cy(j, r) = lam * line.slope;
      f.bias[j] += lam * line.intercept;
    }
  }
  const std::size_t k = f.step;
  add_in_place(f.coef_x[k - 1], matmul(cy, w.W_ax));
  add_bias(f.bias, cy, w.b_a);
  f.coef_a = matmul(cy, w.W_aa);
  f.step = k - 1;
}

void step_lstm(const RecurrentModel& model, const StepRelaxation& rel, LinearForm& f) {
  const auto& w = model.lstm();
  const std::size_t rows = f.coef_a.rows();
  const std::size_t s = model.s;
  Matrix cyo(rows, s);
  Matrix cc = f.coef_c;
  if (!f.coef_a.is_zero()) {
    require(rel.oc, s, "oc");
    for (std::size_t j = 0; j < rows; ++j) {
      for (std::size_t r = 0; r < s; ++r) {
        const double lam = f.coef_a(j, r);
        if (lam == 0.0) continue;
        const BoundingPlane& p = pick(rel.oc[r], lam, f.side);
        cyo(j, r) += lam * p.alpha;
        cc(j, r) += lam * p.beta;
        f.bias[j] += lam * p.gamma;
      }
    }
  }
  Matrix cyf(rows, s), cyi(rows, s), cyg(rows, s), cc_prev(rows, s);
  if (!cc.is_zero()) {
    require(rel.fc, s, "fc");
    require(rel.ig, s, "ig");
    for (std::size_t j = 0; j < rows; ++j) {
      for (std::size_t r = 0; r < s; ++r) {
        const double mu = cc(j, r);
        if (mu == 0.0) continue;
        const BoundingPlane& pf = pick(rel.fc[r], mu, f.side);
        cyf(j, r) += mu * pf.alpha;
        cc_prev(j, r) += mu * pf.beta;
        const BoundingPlane& pi = pick(rel.ig[r], mu, f.side);
        cyi(j, r) += mu * pi.alpha;
        cyg(j, r) += mu * pi.beta;
        f.bias[j] += mu * (pf.gamma + pi.gamma);
      }
    }
  }
  const std::size_t k = f.step;
  Matrix& cx = f.coef_x[k - 1];
  add_in_place(cx, matmul(cyi, w.W_ix));
  add_in_place(cx, matmul(cyf, w.W_fx));
  add_in_place(cx, matmul(cyg, w.W_gx));
  add_in_place(cx, matmul(cyo, w.W_ox));
  add_bias(f.bias, cyi, w.b_i);
  add_bias(f.bias, cyf, w.b_f);
  add_bias(f.bias, cyg, w.b_g);
  add_bias(f.bias, cyo, w.b_o);
  Matrix ca = matmul(cyi, w.W_ia);
  add_in_place(ca, matmul(cyf, w.W_fa));
  add_in_place(ca, matmul(cyg, w.W_ga));
  add_in_place(ca, matmul(cyo, w.W_oa));
  f.coef_a = std::move(ca);
  f.coef_c = std::move(cc_prev);
  f.step = k - 1;
}

/// `extra_n`, when given, is an additional coefficient on the candidate
/// pre-activation y_n(k) (used to bound y_n itself).
void step_gru(const RecurrentModel& model, const StepRelaxation& rel, LinearForm& f,
              const Matrix* extra_n = nullptr) {
  const auto& w = model.gru();
  const std::size_t rows = f.coef_a.rows();
  const std::size_t s = model.s;
  Matrix cyz(rows, s), cyn(rows, s), ch_prev(rows, s);
  if (!f.coef_a.is_zero()) {
    require(rel.zn, s, "zn");
    require(rel.zh, s, "zh");
    for (std::size_t j = 0; j < rows; ++j) {
      for (std::size_t r = 0; r < s; ++r) {
        const double lam = f.coef_a(j, r);
        if (lam == 0.0) continue;
        // (1 - z) tanh(y_n) = sigmoid(-y_z) tanh(y_n): the plane's v is -y_z.
        const BoundingPlane& pn = pick(rel.zn[r], lam, f.side);
        cyz(j, r) -= lam * pn.alpha;
        cyn(j, r) += lam * pn.beta;
        const BoundingPlane& ph = pick(rel.zh[r], lam, f.side);
        cyz(j, r) += lam * ph.alpha;
        ch_prev(j, r) += lam * ph.beta;
        f.bias[j] += lam * (pn.gamma + ph.gamma);
      }
    }
  }
  if (extra_n) add_in_place(cyn, *extra_n);
  Matrix cyr(rows, s), cyhn(rows, s);
  if (!cyn.is_zero()) {
    require(rel.rhn, s, "rhn");
    for (std::size_t j = 0; j < rows; ++j) {
      for (std::size_t r = 0; r < s; ++r) {
        const double mu = cyn(j, r);
        if (mu == 0.0) continue;
        const BoundingPlane& p = pick(rel.rhn[r], mu, f.side);
        cyr(j, r) += mu * p.alpha;
        cyhn(j, r) += mu * p.beta;
        f.bias[j] += mu * p.gamma;
      }
    }
  }
  const std::size_t k = f.step;
  Matrix& cx = f.coef_x[k - 1];
  add_in_place(cx, matmul(cyn, w.W_nx));
  add_in_place(cx, matmul(cyr, w.W_rx));
  add_in_place(cx, matmul(cyz, w.W_zx));
  add_bias(f.bias, cyn, w.b_nx);
  add_bias(f.bias, cyhn, w.b_na);
  add_bias(f.bias, cyr, w.b_r);
  add_bias(f.bias, cyz, w.b_z);
  add_in_place(ch_prev, matmul(cyhn, w.W_na));
  add_in_place(ch_prev, matmul(cyr, w.W_ra));
  add_in_place(ch_prev, matmul(cyz, w.W_za));
  f.coef_a = std::move(ch_prev);
  f.step = k - 1;
}

void backward_step(const RecurrentModel& model, const std::vector<StepRelaxation>& relax,
                   LinearForm& f) {
  const StepRelaxation& rel = relax.at(f.step - 1);
  switch (model.kind()) {
    case CellKind::Vanilla: step_vanilla(model, rel, f); break;
    case CellKind::Lstm: step_lstm(model, rel, f); break;
    case CellKind::Gru: step_gru(model, rel, f); break;
  }
}

void backward_to_start(const RecurrentModel& model, const std::vector<StepRelaxation>& relax,
                       LinearForm& f) {
  while (f.step > 0) backward_step(model, relax, f);
}

/// Extremes of a step-0 form over the ball via Hoelder's inequality.
Vector concretize(const LinearForm& f, const RecurrentModel& model, const std::vector<Vector>& x0,
                  const std::vector<double>& radii, double q) {
  const double sign = f.side == Side::Upper ? 1.0 : -1.0;
  Vector out(f.bias.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    double v = f.bias[j] + dot(f.coef_a.row(j), model.a0.span());
    if (!f.coef_c.empty()) v += dot(f.coef_c.row(j), model.c0.span());
    for (std::size_t k = 0; k < model.m; ++k) {
      const auto row = f.coef_x[k].row(j);
      v += dot(row, x0[k].span());
      if (radii[k] > 0.0) v += sign * radii[k] * dual_norm(row, q);
    }
    // outward pad so the bound survives rounding in the forward pass
    out[j] = v + sign * kRoundingPad * (1.0 + std::abs(v));
  }
  return out;
}

void check_finite(const Vector& v, const std::string& what) {
  for (double x : v) {
    if (!std::isfinite(x) || std::abs(x) > kOverflowLimit) {
      throw NumericalOverflow("bound overflow at " + what);
    }
  }
}

IntervalVec intersect(IntervalVec a, const IntervalVec& b) {
  for (std::size_t r = 0; r < a.lower.size(); ++r) {
    a.lower[r] = std::max(a.lower[r], b.lower[r]);
    a.upper[r] = std::min(a.upper[r], b.upper[r]);
  }
  return a;
}

/// Interval of sigmoid(v) * factor(z) over a box, from the corners.
std::pair<double, double> cross_range(CrossKind kind, double lv, double uv, double lz, double uz) {
  const std::array<double, 4> c = {eval_cross(kind, lv, lz), eval_cross(kind, lv, uz),
                                   eval_cross(kind, uv, lz), eval_cross(kind, uv, uz)};
  return {*std::min_element(c.begin(), c.end()), *std::max_element(c.begin(), c.end())};
}

class Analyzer {
 public:
  Analyzer(const RecurrentModel& model, const std::vector<Vector>& x0, const PerturbationSpec& spec,
           const PropagationOptions& options)
      : model_(model),
        x0_(x0),
        radii_(spec.radii(model.m)),
        q_(dual_exponent(spec.p)),
        options_(options) {
    model.validate();
    if (x0.size() != model.m) throw ShapeError("sequence length does not match model steps");
    for (const auto& f : x0) {
      if (f.size() != model.n) throw ShapeError("frame width does not match model input size");
    }
    relax_.resize(model.m);
  }

  /// Rebuilds relaxations from previously computed bounds.
  void adopt(const PreActivationBounds& bounds) {
    if (bounds.steps.size() != model_.m) throw ShapeError("pre-activation bounds cover the wrong number of steps");
    bounds_ = bounds;
    for (std::size_t k = 1; k <= model_.m; ++k) {
      relax_gates(k);
      relax_state(k);
    }
  }

  PreActivationBounds run_preactivation() {
    bounds_.hidden0 = {model_.a0, model_.a0};
    bounds_.cell0 = {model_.c0, model_.c0};
    bounds_.steps.assign(model_.m, {});
    for (std::size_t k = 1; k <= model_.m; ++k) compute_step(k);
    return bounds_;
  }

  LinearForm output_form(Side side) const {
    LinearForm f = make_form(model_.t, model_, model_.m, side);
    f.coef_a = model_.W_Fa;
    f.bias = model_.b_F;
    return f;
  }

  GlobalBounds global() const {
    GlobalBounds g;
    g.gamma_U = bound_form(output_form(Side::Upper), "output upper");
    g.gamma_L = bound_form(output_form(Side::Lower), "output lower");
    return g;
  }

  std::vector<LinearForm> trace_forms(Side side) const {
    std::vector<LinearForm> forms;
    LinearForm f = output_form(side);
    forms.push_back(f);
    while (f.step > 0) {
      backward_step(model_, relax_, f);
      forms.push_back(f);
    }
    return forms;
  }

 private:
  Vector bound_form(LinearForm f, const std::string& what) const {
    backward_to_start(model_, relax_, f);
    Vector v = concretize(f, model_, x0_, radii_, q_);
    check_finite(v, what);
    return v;
  }

  /// Bounds of rows of a form posed over the state at step `start`.
  IntervalVec bound_pair(const LinearForm& upper, const LinearForm& lower, const std::string& what,
                         const Matrix* extra_n = nullptr) const {
    LinearForm u = upper, l = lower;
    if (extra_n) {
      step_gru(model_, relax_.at(u.step - 1), u, extra_n);
      step_gru(model_, relax_.at(l.step - 1), l, extra_n);
    }
    IntervalVec iv{bound_form(std::move(l), what + " lower"), bound_form(std::move(u), what + " upper")};
    // Both sides are sound; rounding can cross them at zero radius.
    for (std::size_t r = 0; r < iv.lower.size(); ++r) {
      if (iv.lower[r] > iv.upper[r]) std::swap(iv.lower[r], iv.upper[r]);
    }
    return iv;
  }

  /// Gate pre-activation W_x x(k) + W_a a(k-1) + b as a form over step k-1.
  IntervalVec gate_bounds(std::size_t k, const Matrix* wx, const Matrix& wa, const Vector& b,
                          Gate gate) const {
    auto build = [&](Side side) {
      LinearForm f = make_form(model_.s, model_, k - 1, side);
      f.coef_a = wa;
      if (wx) f.coef_x[k - 1] = *wx;
      f.bias = b;
      return f;
    };
    return bound_pair(build(Side::Upper), build(Side::Lower),
                      "step " + std::to_string(k) + " gate " + to_string(gate));
  }

  IntervalVec state_bounds(std::size_t k, bool cell) const {
    auto build = [&](Side side) {
      LinearForm f = make_form(model_.s, model_, k, side);
      (cell ? f.coef_c : f.coef_a) = Matrix::identity(model_.s);
      return f;
    };
    return bound_pair(build(Side::Upper), build(Side::Lower),
                      "step " + std::to_string(k) + (cell ? " cell state" : " hidden state"));
  }

  void set_gate(std::size_t k, Gate g, IntervalVec iv) {
    bounds_.steps[k - 1].gates[static_cast<std::size_t>(g)] = std::move(iv);
  }

  const IntervalVec& gate(std::size_t k, Gate g) const { return bounds_.steps[k - 1].gate(g); }

  std::vector<PlanePair> planes(CrossKind kind, const IntervalVec& v, const IntervalVec& z,
                                bool negate_v = false) const {
    std::vector<PlanePair> out(model_.s);
    for (std::size_t r = 0; r < model_.s; ++r) {
      Box2D box{v.lower[r], v.upper[r], z.lower[r], z.upper[r]};
      if (negate_v) box = {-v.upper[r], -v.lower[r], z.lower[r], z.upper[r]};
      out[r] = options_.cache ? options_.cache->get_or_fit(kind, box, options_.strategy)
                              : bound_cross(kind, box, options_.strategy);
    }
    return out;
  }

  /// Relaxations that only need the gate bounds of step k (and states of k-1).
  void relax_gates(std::size_t k) {
    StepRelaxation& rel = relax_[k - 1];
    switch (model_.kind()) {
      case CellKind::Vanilla: {
        const IntervalVec& y = gate(k, Gate::Y);
        const ScalarFn fn = model_.vanilla().activation == Activation::Tanh ? ScalarFn::Tanh : ScalarFn::Sigmoid;
        rel.act.resize(model_.s);
        for (std::size_t r = 0; r < model_.s; ++r) rel.act[r] = bound_activation(fn, y.lower[r], y.upper[r]);
        break;
      }
      case CellKind::Lstm:
        rel.fc = planes(CrossKind::SigZ, gate(k, Gate::F), bounds_.cell(k - 1));
        rel.ig = planes(CrossKind::SigTanh, gate(k, Gate::I), gate(k, Gate::G));
        break;
      case CellKind::Gru:
        rel.rhn = planes(CrossKind::SigZ, gate(k, Gate::R), gate(k, Gate::HN));
        if (bounds_.steps[k - 1].has(Gate::N)) {
          rel.zn = planes(CrossKind::SigTanh, gate(k, Gate::Z), gate(k, Gate::N), true);
          rel.zh = planes(CrossKind::SigZ, gate(k, Gate::Z), bounds_.hidden(k - 1));
        }
        break;
    }
  }

  /// Relaxations that need the state bounds of step k.
  void relax_state(std::size_t k) {
    if (model_.kind() == CellKind::Lstm) {
      relax_[k - 1].oc = planes(CrossKind::SigTanh, gate(k, Gate::O), bounds_.cell(k));
    }
  }

  void compute_step(std::size_t k) {
    StepBounds& sb = bounds_.steps[k - 1];
    switch (model_.kind()) {
      case CellKind::Vanilla: {
        const auto& w = model_.vanilla();
        set_gate(k, Gate::Y, gate_bounds(k, &w.W_ax, w.W_aa, w.b_a, Gate::Y));
        relax_gates(k);
        const ScalarFn fn = w.activation == Activation::Tanh ? ScalarFn::Tanh : ScalarFn::Sigmoid;
        const IntervalVec& y = gate(k, Gate::Y);
        sb.hidden = {Vector(model_.s), Vector(model_.s)};
        for (std::size_t r = 0; r < model_.s; ++r) {
          sb.hidden.lower[r] = eval(fn, y.lower[r]);
          sb.hidden.upper[r] = eval(fn, y.upper[r]);
        }
        break;
      }
      case CellKind::Lstm: {
        const auto& w = model_.lstm();
        set_gate(k, Gate::I, gate_bounds(k, &w.W_ix, w.W_ia, w.b_i, Gate::I));
        set_gate(k, Gate::F, gate_bounds(k, &w.W_fx, w.W_fa, w.b_f, Gate::F));
        set_gate(k, Gate::G, gate_bounds(k, &w.W_gx, w.W_ga, w.b_g, Gate::G));
        set_gate(k, Gate::O, gate_bounds(k, &w.W_ox, w.W_oa, w.b_o, Gate::O));
        relax_gates(k);

        IntervalVec cell_iv{Vector(model_.s), Vector(model_.s)};
        const IntervalVec& cp = bounds_.cell(k - 1);
        const IntervalVec& f = gate(k, Gate::F);
        const IntervalVec& i = gate(k, Gate::I);
        const IntervalVec& g = gate(k, Gate::G);
        for (std::size_t r = 0; r < model_.s; ++r) {
          const auto fc = cross_range(CrossKind::SigZ, f.lower[r], f.upper[r], cp.lower[r], cp.upper[r]);
          const auto ig = cross_range(CrossKind::SigTanh, i.lower[r], i.upper[r], g.lower[r], g.upper[r]);
          cell_iv.lower[r] = fc.first + ig.first;
          cell_iv.upper[r] = fc.second + ig.second;
        }
        sb.cell = intersect(state_bounds(k, true), cell_iv);
        relax_state(k);

        IntervalVec hid_iv{Vector(model_.s), Vector(model_.s)};
        const IntervalVec& o = gate(k, Gate::O);
        for (std::size_t r = 0; r < model_.s; ++r) {
          const auto oc = cross_range(CrossKind::SigTanh, o.lower[r], o.upper[r], sb.cell.lower[r],
                                      sb.cell.upper[r]);
          hid_iv.lower[r] = oc.first;
          hid_iv.upper[r] = oc.second;
        }
        sb.hidden = intersect(state_bounds(k, false), hid_iv);
        break;
      }
      case CellKind::Gru: {
        const auto& w = model_.gru();
        set_gate(k, Gate::R, gate_bounds(k, &w.W_rx, w.W_ra, w.b_r, Gate::R));
        set_gate(k, Gate::Z, gate_bounds(k, &w.W_zx, w.W_za, w.b_z, Gate::Z));
        set_gate(k, Gate::HN, gate_bounds(k, nullptr, w.W_na, w.b_na, Gate::HN));
        relax_gates(k);

        // y_n = W_nx x(k) + b_nx + sigmoid(y_r) * y_hn, posed at step k with a
        // unit coefficient on y_n and nothing on a(k).
        const Matrix unit = Matrix::identity(model_.s);
        LinearForm up = make_form(model_.s, model_, k, Side::Upper);
        LinearForm lo = make_form(model_.s, model_, k, Side::Lower);
        set_gate(k, Gate::N,
                 bound_pair(up, lo, "step " + std::to_string(k) + " gate n", &unit));
        relax_gates(k);

        IntervalVec hid_iv{Vector(model_.s), Vector(model_.s)};
        const IntervalVec& z = gate(k, Gate::Z);
        const IntervalVec& n = gate(k, Gate::N);
        const IntervalVec& hp = bounds_.hidden(k - 1);
        for (std::size_t r = 0; r < model_.s; ++r) {
          const auto zn = cross_range(CrossKind::SigTanh, -z.upper[r], -z.lower[r], n.lower[r], n.upper[r]);
          const auto zh = cross_range(CrossKind::SigZ, z.lower[r], z.upper[r], hp.lower[r], hp.upper[r]);
          hid_iv.lower[r] = zn.first + zh.first;
          hid_iv.upper[r] = zn.second + zh.second;
        }
        sb.hidden = intersect(state_bounds(k, false), hid_iv);
        break;
      }
    }
  }

  const RecurrentModel& model_;
  const std::vector<Vector>& x0_;
  std::vector<double> radii_;
  double q_;
  PropagationOptions options_;
  PreActivationBounds bounds_;
  std::vector<StepRelaxation> relax_;
};

void expect_kind(const RecurrentModel& model, CellKind kind) {
  if (model.kind() != kind) {
    throw ShapeError("model kind is " + to_string(model.kind()) + ", expected " + to_string(kind));
  }
}

}  // namespace

PreActivationBounds compute_preactivation_bounds(const RecurrentModel& model,
                                                 const std::vector<Vector>& x0,
                                                 const PerturbationSpec& spec,
                                                 const PropagationOptions& options) {
  Analyzer an(model, x0, spec, options);
  return an.run_preactivation();
}

GlobalBounds propagate(const RecurrentModel& model, const std::vector<Vector>& x0,
                       const PerturbationSpec& spec, const PreActivationBounds& bounds,
                       const PropagationOptions& options) {
  Analyzer an(model, x0, spec, options);
  an.adopt(bounds);
  return an.global();
}

GlobalBounds propagate_vanilla(const RecurrentModel& model, const std::vector<Vector>& x0,
                               const PerturbationSpec& spec, const PreActivationBounds& bounds) {
  expect_kind(model, CellKind::Vanilla);
  return propagate(model, x0, spec, bounds, {});
}

GlobalBounds propagate_lstm(const RecurrentModel& model, const std::vector<Vector>& x0,
                            const PerturbationSpec& spec, const PreActivationBounds& bounds,
                            const PropagationOptions& options) {
  expect_kind(model, CellKind::Lstm);
  return propagate(model, x0, spec, bounds, options);
}

GlobalBounds propagate_gru(const RecurrentModel& model, const std::vector<Vector>& x0,
                           const PerturbationSpec& spec, const PreActivationBounds& bounds,
                           const PropagationOptions& options) {
  expect_kind(model, CellKind::Gru);
  return propagate(model, x0, spec, bounds, options);
}

GlobalBounds compute_global_bounds(const RecurrentModel& model, const std::vector<Vector>& x0,
                                   const PerturbationSpec& spec, const PropagationOptions& options) {
  Analyzer an(model, x0, spec, options);
  an.run_preactivation();
  return an.global();
}

std::vector<LinearForm> output_forms(const RecurrentModel& model, const std::vector<Vector>& x0,
                                     const PerturbationSpec& spec, const PreActivationBounds& bounds,
                                     Side side, const PropagationOptions& options) {
  Analyzer an(model, x0, spec, options);
  an.adopt(bounds);
  return an.trace_forms(side);
}

double evaluate_form(const LinearForm& form, std::size_t row, const RecurrentModel& model,
                     const ForwardTrace& trace, const std::vector<Vector>& frames) {
  const Vector& a = form.step == 0 ? model.a0 : trace.steps[form.step - 1].hidden;
  double v = form.bias[row] + dot(form.coef_a.row(row), a.span());
  if (!form.coef_c.empty()) {
    const Vector& c = form.step == 0 ? model.c0 : trace.steps[form.step - 1].cell;
    v += dot(form.coef_c.row(row), c.span());
  }
  for (std::size_t k = 0; k < frames.size(); ++k) v += dot(form.coef_x[k].row(row), frames[k].span());
  return v;
}

}  // namespace rnncert
