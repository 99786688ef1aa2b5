#include "smpe/statemodel/state_model.hpp"

#include "smpe/envs/env.hpp"
#include "smpe/errors.hpp"

#include <cmath>

namespace smpe::statemodel {

namespace {

std::string agent_name(const char* what, int agent) { return std::string(what) + "/" + std::to_string(agent); }

}  // namespace

AgentModel::AgentModel(int agent, const StateModelDims& d)
    : encoder(agent_name("encoder", agent), {d.obs_dim, d.hidden_dim, d.hidden_dim, 2 * d.latent_dim}, nn::Head::kLinear),
      decoder(agent_name("decoder", agent), {d.latent_dim, d.hidden_dim, d.hidden_dim, (d.n_agents - 1) * d.obs_dim},
              nn::Head::kLinear),
      filter(agent_name("filter", agent), {d.obs_dim, d.hidden_dim, d.hidden_dim, d.obs_dim}, nn::Head::kSigmoid),
      filter_target(agent_name("filter_target", agent), {d.obs_dim, d.hidden_dim, d.hidden_dim, d.obs_dim},
                    nn::Head::kSigmoid) {}

StateModel::StateModel(const StateModelDims& dims, std::uint64_t seed) : dims_(dims) {
  if (dims.n_agents < 2) throw ConfigError("StateModel: state modelling needs at least two agents");
  if (dims.obs_dim <= 0 || dims.latent_dim <= 0 || dims.hidden_dim <= 0) {
    throw ConfigError("StateModel: dimensions must be positive");
  }
  for (int i = 0; i < dims.n_agents; ++i) {
    auto m = std::make_unique<AgentModel>(i, dims);
    std::mt19937_64 rng(envs::mix_seed(seed, static_cast<std::uint64_t>(i)));
    m->encoder.init(rng);
    m->decoder.init(rng);
    m->filter.init(rng);
    m->filter_target.init(rng);
    agents_.push_back(std::move(m));
  }
}

GaussianHead StateModel::encode(Tape& tape, int agent, Var obs, bool trainable) {
  return nn::gaussian_head(tape, this->agent(agent).encoder.forward(tape, obs, trainable), dims_.latent_dim);
}

Var StateModel::decode(Tape& tape, int agent, Var z, bool trainable) {
  return this->agent(agent).decoder.forward(tape, z, trainable);
}

Var StateModel::filters(Tape& tape, int agent, Var other_obs, bool use_target, bool trainable) {
  AgentModel& m = this->agent(agent);
  return use_target ? m.filter_target.forward(tape, other_obs, false) : m.filter.forward(tape, other_obs, trainable);
}

ParamGroup StateModel::encoder_params(int agent) {
  ParamGroup g(agent_name("encoder", agent));
  this->agent(agent).encoder.collect(g);
  return g;
}

ParamGroup StateModel::decoder_params(int agent) {
  ParamGroup g(agent_name("decoder", agent));
  this->agent(agent).decoder.collect(g);
  return g;
}

ParamGroup StateModel::filter_params(int agent) {
  ParamGroup g(agent_name("filter", agent));
  this->agent(agent).filter.collect(g);
  return g;
}

ParamGroup StateModel::filter_target_params(int agent) {
  ParamGroup g(agent_name("filter_target", agent));
  this->agent(agent).filter_target.collect(g);
  return g;
}

ParamGroup StateModel::all_encoder_params() {
  ParamGroup g("encoders");
  for (int i = 0; i < dims_.n_agents; ++i) g.extend(encoder_params(i));
  return g;
}

ParamGroup StateModel::all_filter_params() {
  ParamGroup g("filters");
  for (int i = 0; i < dims_.n_agents; ++i) g.extend(filter_params(i));
  return g;
}

ParamGroup StateModel::all_filter_target_params() {
  ParamGroup g("filter_targets");
  for (int i = 0; i < dims_.n_agents; ++i) g.extend(filter_target_params(i));
  return g;
}

ParamGroup StateModel::all_params() {
  ParamGroup g("state_model");
  for (int i = 0; i < dims_.n_agents; ++i) {
    g.extend(encoder_params(i));
    g.extend(decoder_params(i));
    g.extend(filter_params(i));
    g.extend(filter_target_params(i));
  }
  return g;
}

void StateModel::filter_target_update() {
  for (int i = 0; i < dims_.n_agents; ++i) nn::hard_copy(filter_params(i), filter_target_params(i));
}

std::vector<int> others_of(int agent, int n_agents) {
  std::vector<int> out;
  for (int j = 0; j < n_agents; ++j) {
    if (j != agent) out.push_back(j);
  }
  return out;
}

Var filtered_reconstruction_error(Tape& tape, Var target_filter, Var obs, Var filter, Var prediction) {
  const Var diff = tape.sub(tape.mul(target_filter, obs), tape.mul(filter, prediction));
  return tape.row_sum(tape.square(diff));
}

Var kl_standard_normal(Tape& tape, const GaussianHead& head) {
  // 0.5 * sum(mu^2 + sigma^2 - 1 - 2 log sigma)
  const Var var = tape.exp(tape.scale(head.log_sigma, 2.0));
  const Var inner = tape.sub(tape.add_scalar(tape.add(tape.square(head.mean), var), -1.0), tape.scale(head.log_sigma, 2.0));
  const double rows = static_cast<double>(tape.value(head.mean).rows());
  return tape.scale(tape.sum(inner), 0.5 / rows);
}

double kl_standard_normal(double mean, double log_sigma) {
  return 0.5 * (mean * mean + std::exp(2.0 * log_sigma) - 1.0 - 2.0 * log_sigma);
}

Var norm_penalty(Tape& tape, std::span<const Var> filters) {
  if (filters.empty()) throw ConfigError("norm_penalty: no filters");
  std::vector<Var> parts;
  for (Var w : filters) parts.push_back(tape.sum(tape.square(w)));
  Var total = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k) total = tape.add(total, parts[k]);
  const double rows = static_cast<double>(tape.value(filters.front()).rows());
  return tape.scale(total, -1.0 / (rows * static_cast<double>(filters.size())));
}

EdLossTerms ed_losses(Tape& tape, StateModel& model, int agent, const EdBatch& batch, bool no_filters) {
  const StateModelDims& d = model.dims();
  const auto idx = static_cast<std::size_t>(agent);
  const Var own = tape.constant(batch.obs[idx]);
  const GaussianHead head = model.encode(tape, agent, own);
  const Var z = nn::gaussian_sample(tape, head, batch.noise[idx]);
  const Var pred = model.decode(tape, agent, z);
  const Eigen::Index rows = batch.obs[idx].rows();

  std::vector<Var> live;
  Var rec_sum{};
  bool first = true;
  int block = 0;
  for (int j : others_of(agent, d.n_agents)) {
    const Var oj = tape.constant(batch.obs[static_cast<std::size_t>(j)]);
    const Var pj = tape.slice_cols(pred, static_cast<Eigen::Index>(block) * d.obs_dim, d.obs_dim);
    Var w, w_target;
    if (no_filters) {
      w = tape.constant(Matrix::Ones(rows, d.obs_dim));
      w_target = w;
    } else {
      w = model.filters(tape, agent, oj, false);
      w_target = model.filters(tape, agent, oj, true);
      live.push_back(w);
    }
    const Var err = tape.sum(filtered_reconstruction_error(tape, w_target, oj, w, pj));
    rec_sum = first ? err : tape.add(rec_sum, err);
    first = false;
    ++block;
  }
  EdLossTerms terms;
  terms.rec = tape.scale(rec_sum, 1.0 / (static_cast<double>(rows) * (d.n_agents - 1)));
  terms.kl = kl_standard_normal(tape, head);
  if (!live.empty()) terms.norm = norm_penalty(tape, live);
  return terms;
}

EdTrainer::EdTrainer(StateModel& model, const EdHyper& hyper) : model_(model), hyper_(hyper) {
  for (int i = 0; i < model.dims().n_agents; ++i) {
    ParamGroup ed("ed/" + std::to_string(i));
    ed.extend(model.encoder_params(i));
    ed.extend(model.decoder_params(i));
    ed_opt_.emplace_back(ed, hyper.lr_ed);
    filter_opt_.emplace_back(model.filter_params(i), hyper.lr_w);
  }
}

std::optional<EdReport> EdTrainer::update(const EdBuffer& buffer, std::mt19937_64& rng) {
  if (buffer.size() < hyper_.batch_size) return std::nullopt;
  const EdBatch batch = buffer.sample(hyper_.batch_size, model_.dims().latent_dim, rng);
  return update_on(batch);
}

EdReport EdTrainer::update_on(const EdBatch& batch) {
  EdReport report;
  const int n = model_.dims().n_agents;
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    ed_opt_[idx].group().zero_grads();
    filter_opt_[idx].group().zero_grads();
    Tape tape;
    const EdLossTerms t = ed_losses(tape, model_, i, batch, hyper_.no_filters);
    // KL does not depend on the filters and the norm term does not depend on
    // the encoder-decoder, so one backward pass yields both objectives.
    Var total = tape.add(tape.scale(t.rec, hyper_.lambda_rec), tape.scale(t.kl, hyper_.lambda_kl));
    if (t.norm) total = tape.add(total, tape.scale(*t.norm, hyper_.lambda_norm));
    tape.backward(total);
    ed_opt_[idx].step();
    if (!hyper_.no_filters) filter_opt_[idx].step();
    report.rec += tape.item(t.rec) / n;
    report.kl += tape.item(t.kl) / n;
    if (t.norm) report.norm += tape.item(*t.norm) / n;
  }
  ++updates_;
  return report;
}

EdReport EdTrainer::evaluate(const EdBatch& batch) {
  EdReport report;
  const int n = model_.dims().n_agents;
  for (int i = 0; i < n; ++i) {
    Tape tape;
    const EdLossTerms t = ed_losses(tape, model_, i, batch, hyper_.no_filters);
    report.rec += tape.item(t.rec) / n;
    report.kl += tape.item(t.kl) / n;
    if (t.norm) report.norm += tape.item(*t.norm) / n;
  }
  return report;
}

}  // namespace smpe::statemodel
