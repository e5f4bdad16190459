#include "copo/serialization.hpp"

#include <algorithm>
#include <cstring>

#include "copo/errors.hpp"

namespace copo {

namespace {

using nlohmann::json;

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j, const std::string& key) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw InvalidParameters(key + " must be a number or a [re, im] pair");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidParameters(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& context) {
  if (!j.is_object()) throw InvalidParameters(context + " must be a JSON object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return item.key() == a; });
    if (!known) throw InvalidParameters("unknown key '" + item.key() + "' in " + context);
  }
}

json params_to_json(const SystemParams& p) {
  return json{{"kappa", p.kappa},     {"gamma_a", p.gamma_a}, {"gamma_b", p.gamma_b},
              {"J_a", p.J_a},         {"J_b", p.J_b},         {"Delta_a", p.Delta_a},
              {"Delta_b", p.Delta_b}, {"eps1", complex_to_json(p.eps1)},
              {"eps2", complex_to_json(p.eps2)}};
}

void params_from_json(const json& j, SystemParams& p) {
  reject_unknown_keys(j, {"kappa", "gamma_a", "gamma_b", "J_a", "J_b", "Delta_a", "Delta_b", "eps1", "eps2"},
                      "params");
  read(j, "kappa", p.kappa);
  read(j, "gamma_a", p.gamma_a);
  read(j, "gamma_b", p.gamma_b);
  read(j, "J_a", p.J_a);
  read(j, "J_b", p.J_b);
  read(j, "Delta_a", p.Delta_a);
  read(j, "Delta_b", p.Delta_b);
  if (j.contains("eps1")) p.eps1 = complex_from_json(j["eps1"], "eps1");
  if (j.contains("eps2")) p.eps2 = complex_from_json(j["eps2"], "eps2");
}

json sde_config_to_json(const SdeConfig& c) {
  return json{{"dt", c.dt},
              {"t_transient", c.t_transient},
              {"t_measure", c.t_measure},
              {"n_traj", c.n_traj},
              {"seed", c.seed},
              {"stepper", to_string(c.stepper)},
              {"sample_interval", c.sample_interval},
              {"noise_substeps", c.noise_substeps},
              {"midpoint_iterations", c.midpoint_iterations},
              {"threads", c.threads},
              {"batches", c.batches},
              {"divergence_factor", c.divergence_factor}};
}

void sde_config_from_json(const json& j, SdeConfig& c) {
  reject_unknown_keys(j,
                      {"dt", "t_transient", "t_measure", "n_traj", "seed", "stepper", "sample_interval",
                       "noise_substeps", "midpoint_iterations", "threads", "batches", "divergence_factor"},
                      "sde");
  read(j, "dt", c.dt);
  read(j, "t_transient", c.t_transient);
  read(j, "t_measure", c.t_measure);
  read(j, "n_traj", c.n_traj);
  read(j, "seed", c.seed);
  if (j.contains("stepper")) {
    if (!j["stepper"].is_string()) throw InvalidParameters("sde.stepper must be a string");
    c.stepper = stepper_from_string(j["stepper"].get<std::string>());
  }
  read(j, "sample_interval", c.sample_interval);
  read(j, "noise_substeps", c.noise_substeps);
  read(j, "midpoint_iterations", c.midpoint_iterations);
  read(j, "threads", c.threads);
  read(j, "batches", c.batches);
  read(j, "divergence_factor", c.divergence_factor);
}

}  // namespace copo
