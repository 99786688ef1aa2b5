#include "smpe/marl/networks.hpp"

namespace smpe::marl {

ActorNet::ActorNet(const std::string& name, int input_dim, int hidden_dim, int n_actions)
    : fc1(name + ".fc1", input_dim, hidden_dim),
      gru(name + ".gru", hidden_dim, hidden_dim),
      fc2(name + ".fc2", hidden_dim, n_actions) {}

void ActorNet::init(std::mt19937_64& rng) {
  fc1.init_uniform(rng);
  gru.init(rng);
  fc2.init_uniform(rng);
}

void ActorNet::collect(nn::ParamGroup& group) {
  fc1.collect(group);
  gru.collect(group);
  fc2.collect(group);
}

nn::Mlp make_value_net(const std::string& name, int input_dim, int hidden_dim) {
  return nn::Mlp(name, {input_dim, hidden_dim, hidden_dim, 1}, nn::Head::kLinear);
}

}  // namespace smpe::marl
