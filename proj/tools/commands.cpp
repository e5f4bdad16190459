#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "copo/criteria.hpp"
#include "copo/errors.hpp"
#include "copo/linearized.hpp"
#include "copo/serialization.hpp"
#include "copo/spectrum.hpp"

#ifndef COPO_PRESET_DIR
#define COPO_PRESET_DIR "presets"
#endif

namespace copo::cli {

namespace {

using nlohmann::json;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kQuarterTurn = std::numbers::pi / 2.0;

std::string flags_text(const CriteriaFlags& f) {
  std::string s;
  const auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += '+';
    s += name;
  };
  add(f.squeezed, "squeezed");
  add(f.entangled, "entangled");
  add(f.epr, "epr");
  return s.empty() ? "none" : s;
}

// CSV fields in this tool never contain separators except series labels.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

void write_preamble(std::ostream& out, const char* schema, const RunConfig& c) {
  out << "# schema: " << schema << '\n';
  out << "# config: " << to_json(c).dump() << '\n';
}

void write_series_echo(std::ostream& out, const ResolvedSeries& s) {
  const DerivedScales d = derived_scales(s.params);
  out << "# series " << (s.label.empty() ? "-" : s.label) << ": params " << params_to_json(s.params).dump()
      << " eps_c " << format_number(d.eps_crit) << " pump_fraction " << format_number(d.pump_fraction)
      << " theta_deg " << format_number(s.theta * kRadToDeg) << '\n';
}

QuadratureCombination quadrature_by_name(const std::string& name, double theta) {
  if (name == "X1") return QuadratureCombination::single(1, theta);
  if (name == "Y1") return QuadratureCombination::single(1, theta + kQuarterTurn);
  if (name == "X2") return QuadratureCombination::single(2, theta);
  if (name == "Y2") return QuadratureCombination::single(2, theta + kQuarterTurn);
  if (name == "Xp") return QuadratureCombination::pair(theta, 1.0);
  if (name == "Yp") return QuadratureCombination::pair(theta + kQuarterTurn, 1.0);
  if (name == "Xm") return QuadratureCombination::pair(theta, -1.0);
  if (name == "Ym") return QuadratureCombination::pair(theta + kQuarterTurn, -1.0);
  throw InvalidParameters("unknown quadrature '" + name + "'");
}

// Sign flip of every pump-induced gain entry of the low-frequency rows.
void corrupt(LinearModel& m) {
  using namespace slot;
  for (std::size_t r : {alpha1, alpha1_plus, alpha2, alpha2_plus}) {
    for (std::size_t c : {alpha1, alpha1_plus, alpha2, alpha2_plus}) {
      const bool gain = (r == alpha1 && c == alpha1_plus) || (r == alpha1_plus && c == alpha1) ||
                        (r == alpha2 && c == alpha2_plus) || (r == alpha2_plus && c == alpha2);
      if (gain) m.drift(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) *= -1.0;
    }
  }
}

std::filesystem::path preset_path(const std::string& name) {
  if (std::filesystem::is_regular_file(name)) return name;
  const char* env = std::getenv("COPO_PRESET_DIR");
  const std::filesystem::path dir = env != nullptr ? env : COPO_PRESET_DIR;
  const std::filesystem::path p = dir / (name + ".json");
  if (!std::filesystem::is_regular_file(p)) {
    throw InvalidParameters("unknown preset '" + name + "' (looked for " + p.string() + ")");
  }
  return p;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameters("cannot open " + path.string());
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw InvalidParameters("cannot parse " + path.string() + ": " + e.what());
  }
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // no negative zero in the output
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

int cmd_spectrum(const RunConfig& c, std::ostream& out) {
  const std::vector<ResolvedSeries> series = resolve_series(c);
  const std::vector<double> grid = frequency_grid(c.frequency.min, c.frequency.max, c.frequency.points);
  OptimizeOptions opt;
  opt.criteria = c.criteria;

  write_preamble(out, "coupled-opo-spectrum/1", c);
  for (const ResolvedSeries& s : series) write_series_echo(out, s);
  out << "omega,theta_deg,S_X,S_Y,cov_XY,duan_sum,epr_product,flags,S_Xp,S_Yp,S_Xm,S_Ym,series\n";

  for (const ResolvedSeries& s : series) {
    const LinearModel model = build_linear_model(s.params, steady_state(s.params));
    const double ga = s.params.gamma_a;
    for (double w : grid) {
      const SpectralMatrix S = spectral_matrix(model, w);
      const double theta = c.theta.policy == ThetaPolicy::Fixed
                               ? s.theta
                               : optimize_angle(S, ga, c.theta.objective, opt).theta;
      const CorrelationRecord r = correlation_record(S, theta, ga, c.criteria);
      out << format_number(w) << ',' << format_number(r.theta * kRadToDeg) << ',' << format_number(r.S_X)
          << ',' << format_number(r.S_Y) << ',' << format_number(r.cov_XY) << ','
          << format_number(r.duan_sum) << ',' << format_number(r.epr_product) << ',' << flags_text(r.flags);
      for (const char* q : {"Xp", "Yp", "Xm", "Ym"}) {
        out << ',' << format_number(output_spectrum(S, quadrature_by_name(q, theta), ga));
      }
      out << ',' << csv_field(s.label) << '\n';
    }
  }
  return kExitOk;
}

int cmd_stability(const RunConfig& c, std::ostream& out) {
  write_preamble(out, "coupled-opo-stability/1", c);
  out << "J_a,J_b,Delta_a,Delta_b,eps,min_re_eig,eps_c_analytic,eps_c_bisection,rel_diff,regime\n";
  for (double ja : c.stability.J_a) {
    for (double jb : c.stability.J_b) {
      SystemParams p = c.params;
      p.J_a = ja;
      p.J_b = jb;
      if (c.stability.detune_equals_coupling) {
        p.Delta_a = ja;
        p.Delta_b = jb;
      }
      p.validate();
      const double analytic = derived_scales(p.with_pump(0.0)).eps_crit;
      if (c.pump_fraction) p = p.with_pump(Complex(*c.pump_fraction * analytic, 0.0));
      const double bisected = threshold_bisection(p);
      const double rel = std::abs(bisected - analytic) / analytic;
      const bool below = trivial_fixed_point(p).regime == Regime::BelowThreshold;
      out << format_number(ja) << ',' << format_number(jb) << ',' << format_number(p.Delta_a) << ','
          << format_number(p.Delta_b) << ',' << format_number(std::abs(p.eps1)) << ','
          << format_number(min_real_eigenvalue(p)) << ',' << format_number(analytic) << ','
          << format_number(bisected) << ',' << format_number(rel) << ',' << (below ? "below" : "above") << '\n';
    }
  }
  return kExitOk;
}

int cmd_optimize_angle(const RunConfig& c, std::ostream& out) {
  const std::vector<ResolvedSeries> series = resolve_series(c);
  OptimizeOptions opt;
  opt.criteria = c.criteria;
  write_preamble(out, "coupled-opo-optimize-angle/1", c);
  for (const ResolvedSeries& s : series) write_series_echo(out, s);
  out << "series,objective,omega,theta_deg,value,theta_squeeze_formula_deg\n";
  for (const ResolvedSeries& s : series) {
    FrequencyOptimum best;
    if (c.optimize.omega) {
      const AngleOptimum a = optimize_angle(s.params, *c.optimize.omega, c.theta.objective, opt);
      best = {*c.optimize.omega, a.theta, a.value};
    } else {
      best = best_frequency(s.params, c.theta.objective, c.optimize.omega_max, c.optimize.points, opt);
    }
    const TwoModeMoments m =
        two_mode_moments(spectral_matrix(build_linear_model(s.params, steady_state(s.params)), best.omega), 0.0,
                         s.params.gamma_a);
    const double formula = theta_optimal(m.S_X1, m.S_Y1, m.V_X1Y1).squeezed;
    out << csv_field(s.label) << ',' << to_string(c.theta.objective) << ',' << format_number(best.omega) << ','
        << format_number(best.theta * kRadToDeg) << ',' << format_number(best.value) << ','
        << format_number(formula * kRadToDeg) << '\n';
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  const std::vector<ResolvedSeries> series = resolve_series(c);
  write_preamble(out, "coupled-opo-verify/1", c);
  for (const ResolvedSeries& s : series) write_series_echo(out, s);
  bool ok = true;
  out << "series,quadrature,omega,sde,sde_stderr,linearized,z,status\n";
  for (const ResolvedSeries& s : series) {
    LinearModel model = build_linear_model(s.params, steady_state(s.params));
    if (c.verify.corrupt_drift) corrupt(model);
    const Ensemble e = integrate(s.params, c.sde, c.verify.omegas);
    for (const std::string& q : c.verify.quadratures) {
      const QuadratureCombination combo = quadrature_by_name(q, s.theta);
      const SpectrumEstimate est = estimate_output_spectrum(e, combo);
      for (std::size_t k = 0; k < est.omega.size(); ++k) {
        const double pred = output_spectrum(spectral_matrix(model, est.omega[k]), combo, s.params.gamma_a);
        const double diff = est.value[k] - pred;
        const double se = est.std_error[k];
        double z = 0.0;
        if (se > 0.0) {
          z = diff / se;
        } else if (!(std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(pred)))) {
          z = std::numeric_limits<double>::infinity();
        }
        const bool pass = std::abs(z) < c.verify.z_limit;
        ok = ok && pass;
        out << csv_field(s.label) << ',' << q << ',' << format_number(est.omega[k]) << ','
            << format_number(est.value[k]) << ',' << format_number(se) << ',' << format_number(pred) << ','
            << format_number(z) << ',' << (pass ? "pass" : "FAIL") << '\n';
      }
    }
    out << "# series " << (s.label.empty() ? "-" : s.label) << ": trajectories " << e.n_traj << " diverged "
        << e.diverged.size() << " fraction " << format_number(e.divergence_fraction()) << '\n';
  }
  out << "# result: " << (ok ? "pass" : "FAIL") << '\n';
  return ok ? kExitOk : kExitVerifyFailed;
}

int cmd_sde_dump(const RunConfig& c, const std::string& prefix, std::ostream& out) {
  const std::vector<ResolvedSeries> series = resolve_series(c);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const std::string p = series.size() == 1 ? prefix : prefix + "_" + std::to_string(k);
    const RawDumpInfo info = write_raw_dump(series[k].params, c.sde, p);
    out << "wrote " << info.binary_path << " (" << info.records << " records, " << info.diverged
        << " diverged trajectories) and " << info.sidecar_path << '\n';
  }
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum-correlation spectra of two coupled intracavity downconverters"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string preset;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--set", overrides, "Override a config value, e.g. --set params.J_a=2 (repeatable)");
    sub->add_option("--out", out_path, "Output path (prefix for sde-dump); stdout when omitted");
    sub->add_option("--seed", seed, "Random seed for stochastic runs");
    sub->add_option("--preset", preset, "Named preset (fig1..fig6) or path to a preset file");
  };
  CLI::App* spectrum = app.add_subcommand("spectrum", "Correlation spectra over a frequency grid");
  CLI::App* stability = app.add_subcommand("stability", "Threshold map over coupling strengths");
  CLI::App* optimize = app.add_subcommand("optimize-angle", "Optimal local-oscillator angle");
  CLI::App* verify = app.add_subcommand("verify", "Check linearized spectra against stochastic simulation");
  CLI::App* dump = app.add_subcommand("sde-dump", "Write raw stochastic trajectories");
  for (CLI::App* sub : {spectrum, stability, optimize, verify, dump}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig config;
  try {
    json j = json::object();
    if (!preset.empty()) j = read_json_file(preset_path(preset));
    if (!config_path.empty()) j.merge_patch(read_json_file(config_path));
    for (const std::string& o : overrides) apply_override(j, o);
    if (seed) j["sde"]["seed"] = *seed;
    config = run_config_from_json(j);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!out_path.empty() && !dump->parsed()) {
    file.open(out_path, std::ios::trunc);
    if (!file) {
      err << "error: cannot open " << out_path << " for writing\n";
      return kExitUsage;
    }
    sink = &file;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(config, *sink);
    if (stability->parsed()) return cmd_stability(config, *sink);
    if (optimize->parsed()) return cmd_optimize_angle(config, *sink);
    if (verify->parsed()) return cmd_verify(config, *sink);
    return cmd_sde_dump(config, out_path.empty() ? config.sde_dump_prefix : out_path, *sink);
  } catch (const AboveThreshold& e) {
    err << "error: " << e.what() << '\n';
    return kExitAboveThreshold;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace copo::cli
