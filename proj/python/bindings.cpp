#include "smpe/envs/env.hpp"
#include "smpe/errors.hpp"
#include "smpe/explore/simhash.hpp"
#include "smpe/harness/config.hpp"
#include "smpe/harness/metrics.hpp"
#include "smpe/harness/run.hpp"
#include "smpe/statemodel/state_model.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

namespace py = pybind11;
using namespace smpe;

namespace {

harness::KeyValues to_key_values(const std::map<std::string, py::object>& d) {
  harness::KeyValues kv;
  for (const auto& [k, v] : d) {
    std::string s;
    if (py::isinstance<py::bool_>(v)) {
      s = v.cast<bool>() ? "true" : "false";
    } else {
      s = py::str(v).cast<std::string>();
    }
    kv.emplace_back(k, s);
  }
  return kv;
}

/// Config as a key -> string dict, in file order.
py::dict config_dict(const harness::RunConfig& c) {
  py::dict out;
  for (const auto& [k, v] : harness::parse_key_values(harness::to_text(c))) out[py::str(k)] = v;
  return out;
}

py::dict metrics_dict(const marl::MetricsRow& r) {
  py::dict d;
  d["step"] = r.step;
  d["episodes"] = r.episodes;
  d["eval_return"] = r.eval_return;
  d["train_return"] = r.train_return;
  d["mean_intrinsic"] = r.mean_intrinsic;
  d["actor_loss"] = r.losses.actor;
  d["critic_loss"] = r.losses.critic;
  d["critic_w_loss"] = r.losses.critic_w;
  d["rec_loss"] = r.losses.rec;
  d["kl_loss"] = r.losses.kl;
  d["norm_loss"] = r.losses.norm;
  d["encodings_loss"] = r.losses.encodings;
  d["entropy"] = r.losses.entropy;
  d["ed_updates"] = r.ed_updates;
  d["target_updates"] = r.target_updates;
  return d;
}

py::dict step_dict(const envs::StepResult& r) {
  py::dict d;
  d["obs"] = r.obs;
  d["reward"] = r.reward;
  d["agent_rewards"] = r.agent_rewards;
  d["terminated"] = r.terminated;
  d["truncated"] = r.truncated;
  d["state"] = r.state;
  return d;
}

/// Owning handle so Python sees a plain class.
struct PyEnv {
  std::unique_ptr<envs::Env> env;
};

}  // namespace

PYBIND11_MODULE(_smpe, m) {
  m.doc() = "Native core: environments, hashing, configuration, training and evaluation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);
  py::register_exception<TrainingFault>(m, "TrainingFault", PyExc_ArithmeticError);

  py::class_<envs::EnvSpec>(m, "EnvSpec")
      .def_readonly("name", &envs::EnvSpec::name)
      .def_readonly("n_agents", &envs::EnvSpec::n_agents)
      .def_readonly("obs_dim", &envs::EnvSpec::obs_dim)
      .def_readonly("n_actions", &envs::EnvSpec::n_actions)
      .def_readonly("max_episode_len", &envs::EnvSpec::max_episode_len)
      .def_readonly("state_dim", &envs::EnvSpec::state_dim);

  py::class_<PyEnv>(m, "Env")
      .def(py::init([](const std::string& name) { return PyEnv{envs::make_env(name)}; }), py::arg("name"))
      .def_property_readonly("spec", [](const PyEnv& e) { return e.env->spec(); })
      .def(
          "reset",
          [](PyEnv& e, std::uint64_t seed) {
            const envs::Observation o = e.env->reset(seed);
            return py::make_tuple(o.obs, o.state);
          },
          py::arg("seed"), "Returns (per-agent observations, joint state).")
      .def(
          "step", [](PyEnv& e, const std::vector<int>& actions) { return step_dict(e.env->step(actions)); },
          py::arg("actions"))
      .def("observe", [](const PyEnv& e) { return e.env->observe(); })
      .def("state", [](const PyEnv& e) { return e.env->joint_state(); });

  py::class_<explore::SimHash>(m, "SimHash")
      .def(py::init<int, int, std::uint64_t>(), py::arg("bits"), py::arg("dim"), py::arg("seed"))
      .def(
          "key",
          [](const explore::SimHash& h, const std::vector<double>& v) {
            if (static_cast<int>(v.size()) != h.dim()) throw ConfigError("SimHash.key: wrong input size");
            return h.key(v);
          },
          py::arg("v"))
      .def_property_readonly("bits", &explore::SimHash::bits)
      .def_property_readonly("dim", &explore::SimHash::dim);

  m.def("intrinsic_reward", &explore::intrinsic_reward, py::arg("count"), "1 / sqrt(count).");
  m.def("mix_reward", &explore::mix_reward, py::arg("r"), py::arg("r_hat"), py::arg("beta"));
  m.def("kl_standard_normal", py::overload_cast<double, double>(&statemodel::kl_standard_normal), py::arg("mean"),
        py::arg("log_sigma"));

  m.def("config_keys", &harness::config_keys);
  m.def(
      "build_config",
      [](const std::map<std::string, py::object>& overrides) {
        const harness::RunConfig c = harness::build_config({}, to_key_values(overrides));
        harness::validate(c);
        return config_dict(c);
      },
      py::arg("overrides") = std::map<std::string, py::object>{},
      "Defaults, env preset and overrides, validated, as a key -> string dict.");
  m.def(
      "train",
      [](const std::map<std::string, py::object>& overrides) {
        const harness::RunConfig c = harness::build_config({}, to_key_values(overrides));
        harness::validate(c);
        harness::RunResult r;
        {
          py::gil_scoped_release release;
          r = harness::run(c);
        }
        py::dict d;
        d["env_steps"] = r.env_steps;
        d["episodes"] = r.episodes;
        d["rows"] = r.rows;
        d["final_eval"] = r.final_eval;
        d["out_dir"] = c.out_dir;
        return d;
      },
      py::arg("overrides"), "Trains with the given config keys and writes artifacts into out_dir.");
  m.def(
      "evaluate",
      [](const std::string& snapshot, int episodes, std::uint64_t seed, std::optional<std::string> env) {
        std::vector<double> returns;
        double mean = 0.0;
        {
          py::gil_scoped_release release;
          mean = harness::evaluate(snapshot, episodes, seed, env, &returns);
        }
        return py::make_tuple(mean, returns);
      },
      py::arg("snapshot"), py::arg("episodes") = 20, py::arg("seed") = 0, py::arg("env") = py::none(),
      "Greedy evaluation of a snapshot; returns (mean, per-episode returns).");
  m.def(
      "read_metrics",
      [](const std::string& path) {
        py::list out;
        for (const auto& r : harness::read_metrics(path)) out.append(metrics_dict(r));
        return out;
      },
      py::arg("path"));
}
