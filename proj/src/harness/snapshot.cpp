#include "smpe/harness/snapshot.hpp"

#include "smpe/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace smpe::harness {

using nlohmann::json;

void save_snapshot(const std::string& path, const RunConfig& config, marl::Learner& learner) {
  json doc;
  doc["format"] = "smpe-snapshot-1";
  doc["config"] = to_text(config);
  json params = json::object();
  const nn::ParamGroup group = learner.all_params();
  for (const nn::Parameter* p : group.params()) {
    json entry;
    entry["rows"] = p->value.rows();
    entry["cols"] = p->value.cols();
    std::vector<double> data(p->value.data(), p->value.data() + p->value.size());
    entry["data"] = std::move(data);
    params[p->name] = std::move(entry);
  }
  doc["params"] = std::move(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write snapshot '" + path + "'");
  out << doc.dump() << '\n';
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read snapshot '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed snapshot '" + path + "': " + e.what());
  }
  if (doc.value("format", "") != "smpe-snapshot-1") throw ConfigError("not a snapshot: '" + path + "'");

  Snapshot snap;
  snap.config = build_config(parse_key_values(doc.at("config").get<std::string>()));
  const envs::EnvSpec spec = envs::make_env(snap.config.training.env)->spec();
  snap.learner = std::make_unique<marl::Learner>(marl::learner_config(snap.config.training, spec));
  const json& params = doc.at("params");
  const nn::ParamGroup group = snap.learner->all_params();
  for (nn::Parameter* p : group.params()) {
    if (!params.contains(p->name)) throw ConfigError("snapshot lacks array '" + p->name + "'");
    const json& e = params.at(p->name);
    const auto rows = e.at("rows").get<Eigen::Index>();
    const auto cols = e.at("cols").get<Eigen::Index>();
    const auto data = e.at("data").get<std::vector<double>>();
    if (rows != p->value.rows() || cols != p->value.cols() || static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw ConfigError("shape mismatch for array '" + p->name + "'");
    p->value = Eigen::Map<const nn::Matrix>(data.data(), rows, cols);
  }
  return snap;
}

}  // namespace smpe::harness
