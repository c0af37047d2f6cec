#include "fixtures.hpp"

#include "rnncert/random.hpp"

namespace fixtures {

using rnncert::CellKind;

Fixture make(const std::string& name, CellKind kind, std::size_t n, std::size_t s, std::size_t m, std::size_t t,
             std::uint64_t seed, double scale, std::size_t inputs, rnncert::Activation act) {
  Fixture f;
  f.name = name;
  f.model = rnncert::generate_random_model(seed, kind, n, s, m, t, scale, act);
  rnncert::Rng rng(seed * 7919 + 17);
  for (std::size_t i = 0; i < inputs; ++i) {
    Frames x;
    for (std::size_t k = 0; k < m; ++k) {
      Vector v(n);
      for (double& e : v) e = rng.uniform(-1.0, 1.0);
      x.push_back(std::move(v));
    }
    f.labels.push_back(rnncert::argmax(rnncert::forward(f.model, x)));
    f.inputs.push_back(std::move(x));
  }
  return f;
}

std::vector<Fixture> standard(std::size_t k) {
  const auto T = rnncert::Activation::Tanh;
  const auto S = rnncert::Activation::Sigmoid;
  return {
      make("rnn_m1_s2", CellKind::Vanilla, 2, 2, 1, 3, 101, 1.0, k, T),
      make("rnn_m1_s4", CellKind::Vanilla, 3, 4, 1, 3, 102, 0.0, k, T),
      make("rnn_m2_s2", CellKind::Vanilla, 1, 2, 2, 2, 103, 1.0, k, T),
      make("rnn_m2_s3", CellKind::Vanilla, 2, 3, 2, 3, 104, 0.0, k, S),
      make("rnn_m2_s8", CellKind::Vanilla, 2, 8, 2, 4, 105, 0.0, k, T),
      make("rnn_m4_s2", CellKind::Vanilla, 1, 2, 4, 3, 106, 1.0, k, T),
      make("rnn_m4_s4", CellKind::Vanilla, 2, 4, 4, 3, 107, 0.0, k, T),
      make("rnn_m4_s8", CellKind::Vanilla, 3, 8, 4, 3, 108, 0.0, k, S),
      make("lstm_m1_s2", CellKind::Lstm, 2, 2, 1, 3, 201, 1.0, k),
      make("lstm_m1_s4", CellKind::Lstm, 2, 4, 1, 3, 202, 0.0, k),
      make("lstm_m1_s6", CellKind::Lstm, 3, 6, 1, 2, 203, 0.0, k),
      make("lstm_m2_s2", CellKind::Lstm, 1, 2, 2, 3, 204, 1.0, k),
      make("lstm_m2_s3", CellKind::Lstm, 2, 3, 2, 3, 205, 0.0, k),
      make("lstm_m2_s6", CellKind::Lstm, 2, 6, 2, 3, 206, 0.0, k),
      make("gru_m1_s2", CellKind::Gru, 2, 2, 1, 3, 301, 1.0, k),
      make("gru_m1_s4", CellKind::Gru, 2, 4, 1, 3, 302, 0.0, k),
      make("gru_m1_s6", CellKind::Gru, 3, 6, 1, 2, 303, 0.0, k),
      make("gru_m2_s2", CellKind::Gru, 1, 2, 2, 3, 304, 1.0, k),
      make("gru_m2_s3", CellKind::Gru, 2, 3, 2, 3, 305, 0.0, k),
      make("gru_m2_s6", CellKind::Gru, 2, 6, 2, 3, 306, 0.0, k),
  };
}

Fixture tied_logits() {
  Fixture f = make("tied", CellKind::Vanilla, 2, 2, 2, 3, 401, 1.0, 0);
  auto& w = f.model.vanilla();
  w.b_a = Vector(2);
  f.model.W_Fa = rnncert::Matrix{{1.0, -0.5}, {-0.7, 1.2}, {0.3, 0.3}};
  f.model.b_F = Vector{0.25, 0.25, -10.0};
  f.inputs.push_back(Frames(2, Vector(2)));
  f.labels.push_back(rnncert::argmax(rnncert::forward(f.model, f.inputs[0])));
  return f;
}

Fixture last_frame_only() {
  Fixture f = make("last_frame", CellKind::Vanilla, 2, 3, 3, 3, 402, 1.0, 1);
  f.model.vanilla().W_aa = rnncert::Matrix(3, 3);
  f.labels[0] = rnncert::argmax(rnncert::forward(f.model, f.inputs[0]));
  return f;
}

}  // namespace fixtures
