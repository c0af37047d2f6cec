#include "rnncert/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rnncert/random.hpp"

namespace rnncert {

using nlohmann::json;

std::string to_string(CellKind kind) {
  switch (kind) {
    case CellKind::Vanilla: return "rnn";
    case CellKind::Lstm: return "lstm";
    case CellKind::Gru: return "gru";
  }
  return "?";
}

CellKind parse_cell_kind(const std::string& text) {
  if (text == "rnn" || text == "vanilla") return CellKind::Vanilla;
  if (text == "lstm") return CellKind::Lstm;
  if (text == "gru") return CellKind::Gru;
  throw FormatError("unknown model kind '" + text + "'");
}

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

std::string to_string(Gate gate) {
  static constexpr std::array<const char*, kGateCount> names = {"y", "i", "f", "g", "o",
                                                                "r", "z", "hn", "n"};
  return names[static_cast<std::size_t>(gate)];
}

std::vector<Gate> gates_of(CellKind kind) {
  switch (kind) {
    case CellKind::Vanilla: return {Gate::Y};
    case CellKind::Lstm: return {Gate::I, Gate::F, Gate::G, Gate::O};
    case CellKind::Gru: return {Gate::R, Gate::Z, Gate::HN, Gate::N};
  }
  return {};
}

std::vector<double> PerturbationSpec::radii(std::size_t m) const {
  if (epsilon < 0.0 || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be finite and >= 0");
  }
  if (!single_frame) return std::vector<double>(m, epsilon);
  if (*single_frame < 1 || *single_frame > m) {
    throw std::invalid_argument("frame index " + std::to_string(*single_frame) +
                                " outside 1.." + std::to_string(m));
  }
  std::vector<double> r(m, 0.0);
  r[*single_frame - 1] = epsilon;
  return r;
}

// ---- validation ----------------------------------------------------------

namespace {

void expect_shape(const Matrix& w, std::size_t rows, std::size_t cols, const char* name) {
  if (w.rows() != rows || w.cols() != cols) {
    std::ostringstream os;
    os << name << " has shape " << w.rows() << "x" << w.cols() << ", expected " << rows << "x"
       << cols;
    throw ShapeError(os.str());
  }
  if (!all_finite(w.values())) throw ShapeError(std::string(name) + " has non-finite entries");
}

void expect_len(const Vector& v, std::size_t len, const char* name) {
  if (v.size() != len) {
    std::ostringstream os;
    os << name << " has length " << v.size() << ", expected " << len;
    throw ShapeError(os.str());
  }
  if (!all_finite(v.span())) throw ShapeError(std::string(name) + " has non-finite entries");
}

}  // namespace

void RecurrentModel::validate() const {
  if (n == 0 || s == 0 || m == 0 || t == 0) throw ShapeError("dimensions n, s, m, t must be >= 1");
  switch (kind()) {
    case CellKind::Vanilla: {
      const auto& w = vanilla();
      expect_shape(w.W_aa, s, s, "W_aa");
      expect_shape(w.W_ax, s, n, "W_ax");
      expect_len(w.b_a, s, "b_a");
      break;
    }
    case CellKind::Lstm: {
      const auto& w = lstm();
      expect_shape(w.W_ix, s, n, "W_ix");
      expect_shape(w.W_ia, s, s, "W_ia");
      expect_shape(w.W_fx, s, n, "W_fx");
      expect_shape(w.W_fa, s, s, "W_fa");
      expect_shape(w.W_gx, s, n, "W_gx");
      expect_shape(w.W_ga, s, s, "W_ga");
      expect_shape(w.W_ox, s, n, "W_ox");
      expect_shape(w.W_oa, s, s, "W_oa");
      expect_len(w.b_i, s, "b_i");
      expect_len(w.b_f, s, "b_f");
      expect_len(w.b_g, s, "b_g");
      expect_len(w.b_o, s, "b_o");
      break;
    }
    case CellKind::Gru: {
      const auto& w = gru();
      expect_shape(w.W_rx, s, n, "W_rx");
      expect_shape(w.W_ra, s, s, "W_ra");
      expect_shape(w.W_zx, s, n, "W_zx");
      expect_shape(w.W_za, s, s, "W_za");
      expect_shape(w.W_nx, s, n, "W_nx");
      expect_shape(w.W_na, s, s, "W_na");
      expect_len(w.b_r, s, "b_r");
      expect_len(w.b_z, s, "b_z");
      expect_len(w.b_nx, s, "b_nx");
      expect_len(w.b_na, s, "b_na");
      break;
    }
  }
  expect_shape(W_Fa, t, s, "W_Fa");
  expect_len(b_F, t, "b_F");
  expect_len(a0, s, "a0");
  if (kind() == CellKind::Lstm) {
    expect_len(c0, s, "c0");
  } else if (!c0.empty()) {
    throw ShapeError("c0 is only meaningful for lstm models");
  }
}

// ---- forward -------------------------------------------------------------

namespace {

void check_frames(const RecurrentModel& model, const std::vector<Vector>& frames) {
  if (frames.size() != model.m) {
    throw ShapeError("sequence has " + std::to_string(frames.size()) + " frames, model expects " +
                     std::to_string(model.m));
  }
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (frames[k].size() != model.n) {
      throw ShapeError("frame " + std::to_string(k + 1) + " has length " +
                       std::to_string(frames[k].size()) + ", model expects " +
                       std::to_string(model.n));
    }
  }
}

Vector gate_pre(const Matrix& wx, const Vector& x, const Matrix& wa, const Vector& a,
                const Vector& b) {
  Vector y = matvec(wx, x);
  add_in_place(y, matvec(wa, a));
  add_in_place(y, b);
  return y;
}

Vector apply(const Vector& v, double (*f)(double)) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = f(v[i]);
  return out;
}

double tanh_fn(double v) { return std::tanh(v); }

}  // namespace

ForwardTrace forward_trace(const RecurrentModel& model, const std::vector<Vector>& frames) {
  check_frames(model, frames);
  ForwardTrace trace;
  trace.steps.resize(model.m);
  Vector a = model.a0;
  Vector c = model.c0;
  for (std::size_t k = 0; k < model.m; ++k) {
    const Vector& x = frames[k];
    StepTrace& st = trace.steps[k];
    switch (model.kind()) {
      case CellKind::Vanilla: {
        const auto& w = model.vanilla();
        st.gate(Gate::Y) = gate_pre(w.W_ax, x, w.W_aa, a, w.b_a);
        a = apply(st.gate(Gate::Y), w.activation == Activation::Tanh ? tanh_fn : sigmoid);
        break;
      }
      case CellKind::Lstm: {
        const auto& w = model.lstm();
        st.gate(Gate::I) = gate_pre(w.W_ix, x, w.W_ia, a, w.b_i);
        st.gate(Gate::F) = gate_pre(w.W_fx, x, w.W_fa, a, w.b_f);
        st.gate(Gate::G) = gate_pre(w.W_gx, x, w.W_ga, a, w.b_g);
        st.gate(Gate::O) = gate_pre(w.W_ox, x, w.W_oa, a, w.b_o);
        Vector next_c(model.s), next_a(model.s);
        for (std::size_t r = 0; r < model.s; ++r) {
          const double i = sigmoid(st.gate(Gate::I)[r]);
          const double f = sigmoid(st.gate(Gate::F)[r]);
          const double g = std::tanh(st.gate(Gate::G)[r]);
          const double o = sigmoid(st.gate(Gate::O)[r]);
          next_c[r] = f * c[r] + i * g;
          next_a[r] = o * std::tanh(next_c[r]);
        }
        c = std::move(next_c);
        a = std::move(next_a);
        st.cell = c;
        break;
      }
      case CellKind::Gru: {
        const auto& w = model.gru();
        st.gate(Gate::R) = gate_pre(w.W_rx, x, w.W_ra, a, w.b_r);
        st.gate(Gate::Z) = gate_pre(w.W_zx, x, w.W_za, a, w.b_z);
        st.gate(Gate::HN) = affine(w.W_na, a, w.b_na);
        Vector yn = affine(w.W_nx, x, w.b_nx);
        Vector next_a(model.s);
        for (std::size_t r = 0; r < model.s; ++r) {
          yn[r] += sigmoid(st.gate(Gate::R)[r]) * st.gate(Gate::HN)[r];
          const double z = sigmoid(st.gate(Gate::Z)[r]);
          next_a[r] = (1.0 - z) * std::tanh(yn[r]) + z * a[r];
        }
        st.gate(Gate::N) = std::move(yn);
        a = std::move(next_a);
        break;
      }
    }
    st.hidden = a;
  }
  trace.output = affine(model.W_Fa, a, model.b_F);
  return trace;
}

Vector forward(const RecurrentModel& model, const std::vector<Vector>& frames) {
  return forward_trace(model, frames).output;
}

std::size_t argmax(const Vector& logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

std::vector<Vector> input_gradient(const RecurrentModel& model, const std::vector<Vector>& frames,
                                   const Vector& output_weights) {
  const ForwardTrace tr = forward_trace(model, frames);
  const std::size_t s = model.s;
  std::vector<Vector> grad(model.m);
  Vector da = matvec_transposed(model.W_Fa, output_weights);
  Vector dc(s);  // LSTM cell cotangent carried backwards
  for (std::size_t step = model.m; step-- > 0;) {
    const StepTrace& st = tr.steps[step];
    const Vector& a_prev = step == 0 ? model.a0 : tr.steps[step - 1].hidden;
    switch (model.kind()) {
      case CellKind::Vanilla: {
        const auto& w = model.vanilla();
        Vector dy(s);
        for (std::size_t r = 0; r < s; ++r) {
          const double act = st.hidden[r];
          const double deriv =
              w.activation == Activation::Tanh ? 1.0 - act * act : act * (1.0 - act);
          dy[r] = da[r] * deriv;
        }
        grad[step] = matvec_transposed(w.W_ax, dy);
        da = matvec_transposed(w.W_aa, dy);
        break;
      }
      case CellKind::Lstm: {
        const auto& w = model.lstm();
        const Vector& c_prev = step == 0 ? model.c0 : tr.steps[step - 1].cell;
        Vector dyi(s), dyf(s), dyg(s), dyo(s), dc_prev(s);
        for (std::size_t r = 0; r < s; ++r) {
          const double i = sigmoid(st.gate(Gate::I)[r]);
          const double f = sigmoid(st.gate(Gate::F)[r]);
          const double g = std::tanh(st.gate(Gate::G)[r]);
          const double o = sigmoid(st.gate(Gate::O)[r]);
          const double tc = std::tanh(st.cell[r]);
          const double dct = dc[r] + da[r] * o * (1.0 - tc * tc);
          dyo[r] = da[r] * tc * o * (1.0 - o);
          dyi[r] = dct * g * i * (1.0 - i);
          dyg[r] = dct * i * (1.0 - g * g);
          dyf[r] = dct * c_prev[r] * f * (1.0 - f);
          dc_prev[r] = dct * f;
        }
        Vector dx = matvec_transposed(w.W_ix, dyi);
        add_in_place(dx, matvec_transposed(w.W_fx, dyf));
        add_in_place(dx, matvec_transposed(w.W_gx, dyg));
        add_in_place(dx, matvec_transposed(w.W_ox, dyo));
        grad[step] = std::move(dx);
        Vector dap = matvec_transposed(w.W_ia, dyi);
        add_in_place(dap, matvec_transposed(w.W_fa, dyf));
        add_in_place(dap, matvec_transposed(w.W_ga, dyg));
        add_in_place(dap, matvec_transposed(w.W_oa, dyo));
        da = std::move(dap);
        dc = std::move(dc_prev);
        break;
      }
      case CellKind::Gru: {
        const auto& w = model.gru();
        Vector dyr(s), dyz(s), dyn(s), dhn(s), dap(s);
        for (std::size_t r = 0; r < s; ++r) {
          const double rg = sigmoid(st.gate(Gate::R)[r]);
          const double z = sigmoid(st.gate(Gate::Z)[r]);
          const double nn = std::tanh(st.gate(Gate::N)[r]);
          const double dn = da[r] * (1.0 - z);
          const double dz = da[r] * (a_prev[r] - nn);
          dap[r] = da[r] * z;
          dyn[r] = dn * (1.0 - nn * nn);
          dhn[r] = dyn[r] * rg;
          dyr[r] = dyn[r] * st.gate(Gate::HN)[r] * rg * (1.0 - rg);
          dyz[r] = dz * z * (1.0 - z);
        }
        Vector dx = matvec_transposed(w.W_nx, dyn);
        add_in_place(dx, matvec_transposed(w.W_rx, dyr));
        add_in_place(dx, matvec_transposed(w.W_zx, dyz));
        grad[step] = std::move(dx);
        add_in_place(dap, matvec_transposed(w.W_na, dhn));
        add_in_place(dap, matvec_transposed(w.W_ra, dyr));
        add_in_place(dap, matvec_transposed(w.W_za, dyz));
        da = std::move(dap);
        break;
      }
    }
  }
  return grad;
}

// ---- JSON ----------------------------------------------------------------

namespace {

json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (double v : m.row(r)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vector& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw FormatError("missing field '" + where + key + "'");
  }
  return obj.at(key);
}

Vector vector_from(const json& j, const std::string& name) {
  if (!j.is_array()) throw FormatError("field '" + name + "' must be an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw FormatError("field '" + name + "' entry " + std::to_string(i) + " is not a number");
    }
    v[i] = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from(const json& j, const std::string& name) {
  if (!j.is_array()) throw FormatError("field '" + name + "' must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < j.size(); ++r) {
    Vector row = vector_from(j[r], name + "[" + std::to_string(r) + "]");
    rows.push_back(row.values());
    if (rows.back().size() != rows.front().size()) {
      throw FormatError("field '" + name + "' row " + std::to_string(r) + " has length " +
                        std::to_string(rows.back().size()) + ", expected " +
                        std::to_string(rows.front().size()));
    }
  }
  return Matrix::from_rows(rows);
}

std::size_t dim_from(const json& doc, const std::string& key) {
  const json& v = require(doc, key, "");
  if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
    throw FormatError("field '" + key + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("JSON parse error: ") + e.what());
  }
}

}  // namespace

std::string model_to_json(const RecurrentModel& model) {
  json doc;
  doc["kind"] = to_string(model.kind());
  doc["n"] = model.n;
  doc["s"] = model.s;
  doc["m"] = model.m;
  doc["t"] = model.t;
  json w;
  switch (model.kind()) {
    case CellKind::Vanilla: {
      const auto& v = model.vanilla();
      doc["activation"] = v.activation == Activation::Tanh ? "tanh" : "sigmoid";
      w["W_aa"] = to_json(v.W_aa);
      w["W_ax"] = to_json(v.W_ax);
      w["b_a"] = to_json(v.b_a);
      break;
    }
    case CellKind::Lstm: {
      const auto& l = model.lstm();
      w["W_ix"] = to_json(l.W_ix);
      w["W_ia"] = to_json(l.W_ia);
      w["b_i"] = to_json(l.b_i);
      w["W_fx"] = to_json(l.W_fx);
      w["W_fa"] = to_json(l.W_fa);
      w["b_f"] = to_json(l.b_f);
      w["W_gx"] = to_json(l.W_gx);
      w["W_ga"] = to_json(l.W_ga);
      w["b_g"] = to_json(l.b_g);
      w["W_ox"] = to_json(l.W_ox);
      w["W_oa"] = to_json(l.W_oa);
      w["b_o"] = to_json(l.b_o);
      break;
    }
    case CellKind::Gru: {
      const auto& g = model.gru();
      w["W_rx"] = to_json(g.W_rx);
      w["W_ra"] = to_json(g.W_ra);
      w["b_r"] = to_json(g.b_r);
      w["W_zx"] = to_json(g.W_zx);
      w["W_za"] = to_json(g.W_za);
      w["b_z"] = to_json(g.b_z);
      w["W_nx"] = to_json(g.W_nx);
      w["b_nx"] = to_json(g.b_nx);
      w["W_na"] = to_json(g.W_na);
      w["b_na"] = to_json(g.b_na);
      break;
    }
  }
  w["W_Fa"] = to_json(model.W_Fa);
  w["b_F"] = to_json(model.b_F);
  doc["weights"] = std::move(w);
  doc["a0"] = to_json(model.a0);
  if (model.kind() == CellKind::Lstm) doc["c0"] = to_json(model.c0);
  return doc.dump(1) + "\n";
}

RecurrentModel model_from_json(const std::string& text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) throw FormatError("model document must be a JSON object");
  const json& kind_field = require(doc, "kind", "");
  if (!kind_field.is_string()) throw FormatError("field 'kind' must be a string");

  RecurrentModel model;
  model.n = dim_from(doc, "n");
  model.s = dim_from(doc, "s");
  model.m = dim_from(doc, "m");
  model.t = dim_from(doc, "t");
  const json& w = require(doc, "weights", "");
  auto mat = [&](const char* key) {
    return matrix_from(require(w, key, "weights."), std::string("weights.") + key);
  };
  auto vec = [&](const char* key) {
    return vector_from(require(w, key, "weights."), std::string("weights.") + key);
  };
  switch (parse_cell_kind(kind_field.get<std::string>())) {
    case CellKind::Vanilla: {
      VanillaWeights v;
      if (doc.contains("activation")) {
        const std::string act = doc.at("activation").get<std::string>();
        if (act == "tanh") {
          v.activation = Activation::Tanh;
        } else if (act == "sigmoid") {
          v.activation = Activation::Sigmoid;
        } else {
          throw FormatError("unknown activation '" + act + "'");
        }
      }
      v.W_aa = mat("W_aa");
      v.W_ax = mat("W_ax");
      v.b_a = vec("b_a");
      model.cell = std::move(v);
      break;
    }
    case CellKind::Lstm: {
      LstmWeights l;
      l.W_ix = mat("W_ix");
      l.W_ia = mat("W_ia");
      l.b_i = vec("b_i");
      l.W_fx = mat("W_fx");
      l.W_fa = mat("W_fa");
      l.b_f = vec("b_f");
      l.W_gx = mat("W_gx");
      l.W_ga = mat("W_ga");
      l.b_g = vec("b_g");
      l.W_ox = mat("W_ox");
      l.W_oa = mat("W_oa");
      l.b_o = vec("b_o");
      model.cell = std::move(l);
      break;
    }
    case CellKind::Gru: {
      GruWeights g;
      g.W_rx = mat("W_rx");
      g.W_ra = mat("W_ra");
      g.b_r = vec("b_r");
      g.W_zx = mat("W_zx");
      g.W_za = mat("W_za");
      g.b_z = vec("b_z");
      g.W_nx = mat("W_nx");
      g.b_nx = vec("b_nx");
      g.W_na = mat("W_na");
      g.b_na = vec("b_na");
      model.cell = std::move(g);
      break;
    }
  }
  model.W_Fa = mat("W_Fa");
  model.b_F = vec("b_F");
  model.a0 = vector_from(require(doc, "a0", ""), "a0");
  if (model.kind() == CellKind::Lstm) model.c0 = vector_from(require(doc, "c0", ""), "c0");
  model.validate();
  return model;
}

void save_model(const RecurrentModel& model, const std::filesystem::path& path) {
  model.validate();
  write_file(path, model_to_json(model));
}

RecurrentModel load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return model_from_json(text);
  } catch (const std::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string sequence_to_json(const InputSequence& seq) {
  json doc;
  json frames = json::array();
  for (const auto& f : seq.frames) frames.push_back(to_json(f));
  doc["frames"] = std::move(frames);
  if (seq.label) doc["label"] = *seq.label;
  return doc.dump(1) + "\n";
}

InputSequence sequence_from_json(const std::string& text) {
  const json doc = parse_document(text);
  const json& frames = require(doc, "frames", "");
  if (!frames.is_array() || frames.empty()) throw FormatError("field 'frames' must be a non-empty array");
  InputSequence seq;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    seq.frames.push_back(vector_from(frames[k], "frames[" + std::to_string(k) + "]"));
    if (!all_finite(seq.frames.back().span())) {
      throw FormatError("frame " + std::to_string(k + 1) + " has non-finite entries");
    }
  }
  if (doc.contains("label")) {
    if (!doc.at("label").is_number_unsigned()) throw FormatError("field 'label' must be a non-negative integer");
    seq.label = doc.at("label").get<std::size_t>();
  }
  return seq;
}

void save_sequence(const InputSequence& seq, const std::filesystem::path& path) {
  write_file(path, sequence_to_json(seq));
}

InputSequence load_sequence(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return sequence_from_json(text);
  } catch (const std::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void check_sequence(const RecurrentModel& model, const InputSequence& seq) {
  check_frames(model, seq.frames);
  if (seq.label && *seq.label >= model.t) {
    throw ShapeError("label " + std::to_string(*seq.label) + " outside 0.." +
                     std::to_string(model.t - 1));
  }
}

RecurrentModel generate_random_model(std::uint64_t seed, CellKind kind, std::size_t n, std::size_t s,
                                     std::size_t m, std::size_t t, double weight_scale,
                                     Activation activation) {
  Rng rng(seed);
  const double scale = weight_scale > 0.0 ? weight_scale : 1.0 / std::sqrt(static_cast<double>(s));
  auto mat = [&](std::size_t r, std::size_t c) {
    Matrix w(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) w(i, j) = rng.uniform(-scale, scale);
    return w;
  };
  auto vec = [&](std::size_t len) {
    Vector v(len);
    for (auto& x : v) x = rng.uniform(-scale, scale);
    return v;
  };
  RecurrentModel model;
  model.n = n;
  model.s = s;
  model.m = m;
  model.t = t;
  switch (kind) {
    case CellKind::Vanilla: {
      VanillaWeights v;
      v.activation = activation;
      v.W_aa = mat(s, s);
      v.W_ax = mat(s, n);
      v.b_a = vec(s);
      model.cell = std::move(v);
      break;
    }
    case CellKind::Lstm: {
      LstmWeights l;
      l.W_ix = mat(s, n);
      l.W_ia = mat(s, s);
      l.b_i = vec(s);
      l.W_fx = mat(s, n);
      l.W_fa = mat(s, s);
      l.b_f = vec(s);
      l.W_gx = mat(s, n);
      l.W_ga = mat(s, s);
      l.b_g = vec(s);
      l.W_ox = mat(s, n);
      l.W_oa = mat(s, s);
      l.b_o = vec(s);
      model.cell = std::move(l);
      model.c0 = Vector(s);
      break;
    }
    case CellKind::Gru: {
      GruWeights g;
      g.W_rx = mat(s, n);
      g.W_ra = mat(s, s);
      g.b_r = vec(s);
      g.W_zx = mat(s, n);
      g.W_za = mat(s, s);
      g.b_z = vec(s);
      g.W_nx = mat(s, n);
      g.b_nx = vec(s);
      g.W_na = mat(s, s);
      g.b_na = vec(s);
      model.cell = std::move(g);
      break;
    }
  }
  model.W_Fa = mat(t, s);
  model.b_F = vec(t);
  model.a0 = Vector(s);
  model.validate();
  return model;
}

}  // namespace rnncert
