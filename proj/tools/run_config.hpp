#pragma once

// Run configuration for the command-line front end: base parameters, sweep
// specifications and per-command settings, read from JSON.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "copo/criteria.hpp"
#include "copo/model.hpp"
#include "copo/sde.hpp"

namespace copo::cli {

inline constexpr int kSchemaVersion = 1;

struct FrequencySweep {
  double min = -20.0;
  double max = 20.0;
  std::size_t points = 1001;
};

enum class ThetaPolicy { Fixed, Optimize };

struct ThetaSpec {
  ThetaPolicy policy = ThetaPolicy::Fixed;
  double degrees = 0.0;
  Objective objective = Objective::Squeezing;
};

/// One curve of a sweep. `params` holds overrides applied on top of the base
/// parameters.
struct SeriesSpec {
  std::string label;
  nlohmann::json params = nlohmann::json::object();
  std::optional<double> pump_fraction;
  std::optional<double> theta_degrees;
};

struct StabilitySweep {
  std::vector<double> J_a{0.0, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> J_b{0.0, 1.0, 2.0, 5.0, 10.0};
  /// Set Delta_a = J_a and Delta_b = J_b at every grid point.
  bool detune_equals_coupling = false;
};

struct OptimizeSpec {
  /// Fixed analysis frequency; when absent the best frequency in
  /// [0, omega_max] is searched.
  std::optional<double> omega = 0.0;
  double omega_max = 20.0;
  std::size_t points = 801;
};

struct VerifySpec {
  std::vector<double> omegas{0.0, 0.5, 1.0, 2.0, 4.0};
  /// Any of X1, Y1, X2, Y2, Xp, Yp, Xm, Ym; X at the series angle, Y a quarter
  /// turn further, p/m the sum and difference of the two modes.
  std::vector<std::string> quadratures{"X1", "Y1", "Xp", "Yp", "Xm", "Ym"};
  double z_limit = 3.0;
  /// Negative control: flip the sign of the parametric-gain entries of the
  /// drift matrix used for the linearized prediction.
  bool corrupt_drift = false;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string description;
  SystemParams params;
  /// When set, both pumps are real and equal to this fraction of eps_c.
  std::optional<double> pump_fraction;
  FrequencySweep frequency;
  ThetaSpec theta;
  CriteriaOptions criteria;
  std::vector<SeriesSpec> series;
  StabilitySweep stability;
  OptimizeSpec optimize;
  VerifySpec verify;
  SdeConfig sde;
  std::string sde_dump_prefix = "sde_dump";
};

/// A series with its parameters resolved.
struct ResolvedSeries {
  std::string label;
  SystemParams params;
  double theta = 0.0;  ///< radians
};

nlohmann::json to_json(const RunConfig& c);
/// Throws InvalidParameters on unknown keys, bad values or an unsupported
/// schema version.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Series to evaluate; the base parameters form a single unnamed series when
/// the config lists none.
std::vector<ResolvedSeries> resolve_series(const RunConfig& c);

/// Set a dotted path ("params.J_a", "sde.n_traj") in `j`. The value is parsed
/// as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

std::string to_string(Objective o);
Objective objective_from_string(const std::string& s);
std::string to_string(DuanPairing d);
DuanPairing pairing_from_string(const std::string& s);

}  // namespace copo::cli
