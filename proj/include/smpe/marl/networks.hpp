#pragma once

#include "smpe/nncore/layers.hpp"

#include <random>
#include <string>

namespace smpe::marl {

using nn::Tape;
using nn::Var;

/// Recurrent actor: fc1 -> ReLU -> GRU -> fc2 (logits).
struct ActorNet {
  ActorNet(const std::string& name, int input_dim, int hidden_dim, int n_actions);

  /// ReLU(fc1(x)); rows are independent so whole rollouts can be embedded at once.
  Var embed(Tape& tape, Var input, bool trainable = true) { return tape.relu(tape.linear(input, fc1, trainable)); }
  Var recur(Tape& tape, Var features, Var hidden, bool trainable = true) {
    return gru.step(tape, features, hidden, trainable);
  }
  Var logits(Tape& tape, Var hidden, bool trainable = true) { return tape.linear(hidden, fc2, trainable); }

  void init(std::mt19937_64& rng);
  void collect(nn::ParamGroup& group);

  nn::Linear fc1;
  nn::GruCell gru;
  nn::Linear fc2;
};

/// Three-layer value network with a scalar linear head.
nn::Mlp make_value_net(const std::string& name, int input_dim, int hidden_dim);

}  // namespace smpe::marl
