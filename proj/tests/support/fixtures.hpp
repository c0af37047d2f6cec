#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rnncert/model.hpp"

namespace fixtures {

using rnncert::RecurrentModel;
using rnncert::Vector;
using Frames = std::vector<Vector>;

struct Fixture {
  std::string name;
  RecurrentModel model;
  std::vector<Frames> inputs;
  std::vector<std::size_t> labels;  // predicted class of each input
};

/// 20 seeded fixtures: 8 vanilla (m in {1,2,4}, s <= 8), 6 LSTM and 6 GRU
/// (m in {1,2}, s <= 6). Each has `inputs_per_fixture` inputs.
std::vector<Fixture> standard(std::size_t inputs_per_fixture = 3);

Fixture make(const std::string& name, rnncert::CellKind kind, std::size_t n, std::size_t s, std::size_t m,
             std::size_t t, std::uint64_t seed, double scale, std::size_t inputs,
             rnncert::Activation act = rnncert::Activation::Tanh);

/// Vanilla tanh RNN with zero state and input, so every logit equals its
/// bias; classes 0 and 1 share the top bias with different W_Fa rows.
Fixture tied_logits();

/// Vanilla RNN with W_aa = 0: only the last frame reaches the output.
Fixture last_frame_only();

/// Sum of per-frame distortion check dimensions.
inline std::size_t perturbed_dims(const RecurrentModel& m) { return m.m * m.n; }

}  // namespace fixtures
