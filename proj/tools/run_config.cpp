#include "run_config.hpp"

#include <algorithm>
#include <numbers>

#include "copo/errors.hpp"
#include "copo/serialization.hpp"

namespace copo::cli {

namespace {

using nlohmann::json;

constexpr double kDegree = std::numbers::pi / 180.0;

template <typename T>
T get(const json& j, const char* key, const std::string& context) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidParameters("bad value for '" + context + "." + key + "': " + e.what());
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& context) {
  if (j.contains(key)) out = get<T>(j, key, context);
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out, const std::string& context) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = get<T>(j, key, context);
  }
}

template <typename T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string to_string(ThetaPolicy p) { return p == ThetaPolicy::Fixed ? "fixed" : "optimize"; }

ThetaPolicy policy_from_string(const std::string& s) {
  if (s == "fixed") return ThetaPolicy::Fixed;
  if (s == "optimize") return ThetaPolicy::Optimize;
  throw InvalidParameters("theta.policy must be 'fixed' or 'optimize', got '" + s + "'");
}

}  // namespace

std::string to_string(Objective o) {
  switch (o) {
    case Objective::Squeezing:
      return "squeezing";
    case Objective::Duan:
      return "duan";
    case Objective::Epr:
      return "epr";
  }
  return "unknown";
}

Objective objective_from_string(const std::string& s) {
  if (s == "squeezing") return Objective::Squeezing;
  if (s == "duan") return Objective::Duan;
  if (s == "epr") return Objective::Epr;
  throw InvalidParameters("objective must be squeezing, duan or epr, got '" + s + "'");
}

std::string to_string(DuanPairing d) {
  return d == DuanPairing::XMinusYPlus ? "x-minus-y-plus" : "x-plus-y-minus";
}

DuanPairing pairing_from_string(const std::string& s) {
  if (s == "x-minus-y-plus") return DuanPairing::XMinusYPlus;
  if (s == "x-plus-y-minus") return DuanPairing::XPlusYMinus;
  throw InvalidParameters("duan pairing must be x-minus-y-plus or x-plus-y-minus, got '" + s + "'");
}

json to_json(const RunConfig& c) {
  json series = json::array();
  for (const SeriesSpec& s : c.series) {
    series.push_back({{"label", s.label},
                      {"params", s.params},
                      {"pump_fraction", optional_to_json(s.pump_fraction)},
                      {"theta_degrees", optional_to_json(s.theta_degrees)}});
  }
  return json{
      {"schema_version", c.schema_version},
      {"description", c.description},
      {"params", params_to_json(c.params)},
      {"pump_fraction", optional_to_json(c.pump_fraction)},
      {"frequency", {{"min", c.frequency.min}, {"max", c.frequency.max}, {"points", c.frequency.points}}},
      {"theta",
       {{"policy", to_string(c.theta.policy)},
        {"degrees", c.theta.degrees},
        {"objective", to_string(c.theta.objective)}}},
      {"criteria", {{"duan_pairing", to_string(c.criteria.pairing)}, {"epr_infer_from", c.criteria.infer_from}}},
      {"series", series},
      {"stability",
       {{"J_a", c.stability.J_a},
        {"J_b", c.stability.J_b},
        {"detune_equals_coupling", c.stability.detune_equals_coupling}}},
      {"optimize",
       {{"omega", optional_to_json(c.optimize.omega)},
        {"omega_max", c.optimize.omega_max},
        {"points", c.optimize.points}}},
      {"verify",
       {{"omegas", c.verify.omegas},
        {"quadratures", c.verify.quadratures},
        {"z_limit", c.verify.z_limit},
        {"corrupt_drift", c.verify.corrupt_drift}}},
      {"sde", sde_config_to_json(c.sde)},
      {"sde_dump_prefix", c.sde_dump_prefix},
  };
}

RunConfig run_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"schema_version", "description", "params", "pump_fraction", "frequency", "theta",
                       "criteria", "series", "stability", "optimize", "verify", "sde", "sde_dump_prefix"},
                      "config");
  RunConfig c;
  read(j, "schema_version", c.schema_version, "config");
  if (c.schema_version != kSchemaVersion) {
    throw InvalidParameters("unsupported schema_version " + std::to_string(c.schema_version) +
                            " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  read(j, "description", c.description, "config");
  if (j.contains("params")) params_from_json(j["params"], c.params);
  read_optional(j, "pump_fraction", c.pump_fraction, "config");

  if (j.contains("frequency")) {
    const json& f = j["frequency"];
    reject_unknown_keys(f, {"min", "max", "points"}, "frequency");
    read(f, "min", c.frequency.min, "frequency");
    read(f, "max", c.frequency.max, "frequency");
    read(f, "points", c.frequency.points, "frequency");
  }
  if (j.contains("theta")) {
    const json& t = j["theta"];
    reject_unknown_keys(t, {"policy", "degrees", "objective"}, "theta");
    if (t.contains("policy")) c.theta.policy = policy_from_string(get<std::string>(t, "policy", "theta"));
    read(t, "degrees", c.theta.degrees, "theta");
    if (t.contains("objective")) c.theta.objective = objective_from_string(get<std::string>(t, "objective", "theta"));
  }
  if (j.contains("criteria")) {
    const json& cr = j["criteria"];
    reject_unknown_keys(cr, {"duan_pairing", "epr_infer_from"}, "criteria");
    if (cr.contains("duan_pairing")) {
      c.criteria.pairing = pairing_from_string(get<std::string>(cr, "duan_pairing", "criteria"));
    }
    read(cr, "epr_infer_from", c.criteria.infer_from, "criteria");
    if (c.criteria.infer_from != 1 && c.criteria.infer_from != 2) {
      throw InvalidParameters("criteria.epr_infer_from must be 1 or 2");
    }
  }
  if (j.contains("series")) {
    if (!j["series"].is_array()) throw InvalidParameters("series must be an array");
    for (const json& s : j["series"]) {
      reject_unknown_keys(s, {"label", "params", "pump_fraction", "theta_degrees"}, "series entry");
      SeriesSpec spec;
      read(s, "label", spec.label, "series");
      if (s.contains("params")) {
        spec.params = s["params"];
        SystemParams probe;
        params_from_json(spec.params, probe);  // validates the keys early
      }
      read_optional(s, "pump_fraction", spec.pump_fraction, "series");
      read_optional(s, "theta_degrees", spec.theta_degrees, "series");
      c.series.push_back(std::move(spec));
    }
  }
  if (j.contains("stability")) {
    const json& s = j["stability"];
    reject_unknown_keys(s, {"J_a", "J_b", "detune_equals_coupling"}, "stability");
    read(s, "J_a", c.stability.J_a, "stability");
    read(s, "J_b", c.stability.J_b, "stability");
    read(s, "detune_equals_coupling", c.stability.detune_equals_coupling, "stability");
  }
  if (j.contains("optimize")) {
    const json& o = j["optimize"];
    reject_unknown_keys(o, {"omega", "omega_max", "points"}, "optimize");
    read_optional(o, "omega", c.optimize.omega, "optimize");
    read(o, "omega_max", c.optimize.omega_max, "optimize");
    read(o, "points", c.optimize.points, "optimize");
  }
  if (j.contains("verify")) {
    const json& v = j["verify"];
    reject_unknown_keys(v, {"omegas", "quadratures", "z_limit", "corrupt_drift"}, "verify");
    read(v, "omegas", c.verify.omegas, "verify");
    read(v, "quadratures", c.verify.quadratures, "verify");
    read(v, "z_limit", c.verify.z_limit, "verify");
    read(v, "corrupt_drift", c.verify.corrupt_drift, "verify");
    for (const std::string& q : c.verify.quadratures) {
      static const char* known[] = {"X1", "Y1", "X2", "Y2", "Xp", "Yp", "Xm", "Ym"};
      if (std::find(std::begin(known), std::end(known), q) == std::end(known)) {
        throw InvalidParameters("unknown verify quadrature '" + q + "'");
      }
    }
  }
  if (j.contains("sde")) sde_config_from_json(j["sde"], c.sde);
  read(j, "sde_dump_prefix", c.sde_dump_prefix, "config");

  if (c.frequency.points == 0) throw InvalidParameters("frequency.points must be positive");
  if (c.optimize.points < 3) throw InvalidParameters("optimize.points must be at least 3");
  return c;
}

std::vector<ResolvedSeries> resolve_series(const RunConfig& c) {
  const auto resolve = [&](const SeriesSpec& s) {
    ResolvedSeries r;
    r.label = s.label;
    r.params = c.params;
    params_from_json(s.params, r.params);
    const std::optional<double> fraction = s.pump_fraction ? s.pump_fraction : c.pump_fraction;
    if (fraction) {
      r.params.validate();
      const double ec = derived_scales(r.params.with_pump(0.0)).eps_crit;
      r.params = r.params.with_pump(Complex(*fraction * ec, 0.0));
    }
    r.params.validate();
    r.theta = (s.theta_degrees ? *s.theta_degrees : c.theta.degrees) * kDegree;
    return r;
  };
  std::vector<ResolvedSeries> out;
  if (c.series.empty()) {
    out.push_back(resolve(SeriesSpec{}));
  } else {
    for (const SeriesSpec& s : c.series) out.push_back(resolve(s));
  }
  return out;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidParameters("--set expects key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw InvalidParameters("empty component in --set path '" + path + "'");
    if (!node->is_object()) {
      if (!node->is_null()) throw InvalidParameters("--set path '" + path + "' crosses a non-object value");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace copo::cli
