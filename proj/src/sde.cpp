#include "copo/sde.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "copo/errors.hpp"
#include "copo/linearized.hpp"
#include "copo/serialization.hpp"

namespace copo {

namespace {

constexpr double kMaxStepEigenProduct = 0.1;
constexpr std::size_t kPhasorResync = 256;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trajectory_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(0x5851f42d4c957f2dULL + index));
}

std::size_t count_steps(double length, double step) {
  const double n = std::round(length / step);
  return n <= 0.0 ? 0 : static_cast<std::size_t>(n);
}

// Wiener increments for the four noise channels. Substeps are drawn
// substep-major so a run at dt with s substeps consumes the same normals, in
// the same order, as a run at dt/s.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, double dt, int substeps)
      : rng_(seed), scale_(std::sqrt(dt / substeps)), substeps_(substeps) {}

  std::array<double, 4> next() {
    std::array<double, 4> dW{};
    for (int s = 0; s < substeps_; ++s) {
      for (double& w : dW) w += normal_(rng_);
    }
    for (double& w : dW) w *= scale_;
    return dW;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double scale_;
  int substeps_;
};

void add_noise(const PhaseState& at, double kappa, const std::array<double, 4>& dW, double weight,
               PhaseState& out) {
  using namespace slot;
  out[alpha1] += weight * std::sqrt(kappa * at[beta1]) * dW[0];
  out[alpha1_plus] += weight * std::sqrt(kappa * at[beta1_plus]) * dW[1];
  out[alpha2] += weight * std::sqrt(kappa * at[beta2]) * dW[2];
  out[alpha2_plus] += weight * std::sqrt(kappa * at[beta2_plus]) * dW[3];
}

double divergence_limit(const SystemParams& p, const SdeConfig& cfg) {
  const SteadyState ss = trivial_fixed_point(p);
  const double b = std::max({std::abs(ss.beta1), std::abs(ss.beta2), 1.0});
  return cfg.divergence_factor * b;
}

bool out_of_bounds(const PhaseState& x, double limit) {
  const double limit2 = limit * limit;
  for (const Complex& z : x) {
    const double n = std::norm(z);
    if (!(n <= limit2)) return true;  // also catches NaN
  }
  return false;
}

// Per-trajectory accumulator of the Fourier amplitudes of the four
// low-frequency channels at +w and -w.
class FourierAccumulator {
 public:
  FourierAccumulator(std::span<const double> omegas, double h, std::size_t n_samples)
      : omegas_(omegas.begin(), omegas.end()), h_(h), amp_(omegas.size()), phasor_(omegas.size()),
        step_(omegas.size()), taper_(n_samples) {
    for (std::size_t m = 0; m < omegas_.size(); ++m) step_[m] = std::polar(1.0, -omegas_[m] * h_);
    // Hann taper: removes the 1/T leakage bias of a rectangular record.
    double ss = 0.0;
    for (std::size_t n = 0; n < n_samples; ++n) {
      const double s = std::sin(std::numbers::pi * (static_cast<double>(n) + 0.5) / static_cast<double>(n_samples));
      taper_[n] = s * s;
      ss += taper_[n] * taper_[n];
    }
    norm_ = 1.0 / (ss * h_);
  }

  void reset() {
    for (auto& a : amp_) a = {};
    for (std::size_t m = 0; m < omegas_.size(); ++m) phasor_[m] = step_[m];
  }

  // Sample n sits at t = (n + 1) h.
  void add(std::size_t n, const PhaseState& x) {
    if (n % kPhasorResync == 0) {
      for (std::size_t m = 0; m < omegas_.size(); ++m) {
        phasor_[m] = std::polar(1.0, -omegas_[m] * h_ * static_cast<double>(n + 1));
      }
    }
    for (std::size_t m = 0; m < omegas_.size(); ++m) {
      const Complex z = phasor_[m] * (h_ * taper_[n]);
      const Complex zc = std::conj(phasor_[m]) * (h_ * taper_[n]);
      auto& a = amp_[m];
      for (std::size_t k = 0; k < 4; ++k) {
        a[k] += x[k] * z;
        a[4 + k] += x[k] * zc;
      }
      phasor_[m] *= step_[m];
    }
  }

  // cross(k, l) += a_k(w) a_l(-w) / (h sum w^2), which is a_k a_l / T untapered
  void accumulate(std::vector<Eigen::Matrix4cd>& cross) const {
    for (std::size_t m = 0; m < omegas_.size(); ++m) {
      const auto& a = amp_[m];
      for (int k = 0; k < 4; ++k) {
        for (int l = 0; l < 4; ++l) {
          cross[m](k, l) += a[static_cast<std::size_t>(k)] * a[static_cast<std::size_t>(4 + l)] * norm_;
        }
      }
    }
  }

 private:
  std::vector<double> omegas_;
  double h_;
  std::vector<std::array<Complex, 8>> amp_;
  std::vector<Complex> phasor_;
  std::vector<Complex> step_;
  std::vector<double> taper_;
  double norm_ = 0.0;
};

struct BatchResult {
  EnsembleBatch sums;
  std::vector<std::size_t> diverged;
};

BatchResult run_batch(const SystemParams& p, const SdeConfig& cfg, std::span<const double> omegas,
                      std::size_t first, std::size_t last) {
  using namespace slot;
  BatchResult out;
  out.sums.cross.assign(omegas.size(), Eigen::Matrix4cd::Zero());
  const double h = cfg.dt * static_cast<double>(cfg.steps_per_sample());
  const std::size_t n_samples = cfg.measure_samples();
  FourierAccumulator fourier(omegas, h, n_samples);

  for (std::size_t traj = first; traj < last; ++traj) {
    fourier.reset();
    std::array<Complex, 6> moments{};
    const auto observer = [&](std::size_t n, double, const PhaseState& x) {
      fourier.add(n, x);
      moments[0] += x[beta1];
      moments[1] += x[beta2];
      moments[2] += x[alpha1_plus] * x[alpha1];
      moments[3] += x[alpha2_plus] * x[alpha2];
      moments[4] += x[alpha1] * x[alpha1];
      moments[5] += x[alpha2] * x[alpha2];
    };
    const TrajectoryOutcome o = simulate_trajectory(p, cfg, traj, observer);
    if (o.diverged) {
      out.diverged.push_back(traj);
      continue;
    }
    ++out.sums.count;
    fourier.accumulate(out.sums.cross);
    for (std::size_t k = 0; k < moments.size(); ++k) {
      out.sums.moments[k] += moments[k] / static_cast<double>(n_samples);
    }
  }
  return out;
}

// Mean and standard error of a statistic from per-batch values weighted by
// batch size.
std::pair<double, double> batch_statistics(const std::vector<double>& values,
                                           const std::vector<std::size_t>& counts) {
  double total = 0.0, weighted = 0.0;
  std::size_t used = 0;
  for (std::size_t b = 0; b < values.size(); ++b) {
    if (counts[b] == 0) continue;
    total += static_cast<double>(counts[b]);
    weighted += static_cast<double>(counts[b]) * values[b];
    ++used;
  }
  if (used == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double mean = weighted / total;
  if (used < 2) return {mean, std::numeric_limits<double>::quiet_NaN()};
  double ss = 0.0;
  for (std::size_t b = 0; b < values.size(); ++b) {
    if (counts[b] == 0) continue;
    const double d = values[b] - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(used - 1);
  return {mean, std::sqrt(var / static_cast<double>(used))};
}

void write_le_double(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0x00000000000000ffULL) << 56) | ((bits & 0x000000000000ff00ULL) << 40) |
           ((bits & 0x0000000000ff0000ULL) << 24) | ((bits & 0x00000000ff000000ULL) << 8) |
           ((bits & 0x000000ff00000000ULL) >> 8) | ((bits & 0x0000ff0000000000ULL) >> 24) |
           ((bits & 0x00ff000000000000ULL) >> 40) | ((bits & 0xff00000000000000ULL) >> 56);
  }
  char buf[8];
  std::memcpy(buf, &bits, sizeof buf);
  os.write(buf, sizeof buf);
}

void warn_if_above_threshold(const SystemParams& p) {
  if (trivial_fixed_point(p).regime == Regime::AtOrAboveThreshold) {
    std::cerr << "warning: pump at or above threshold (eps_c = " << derived_scales(p).eps_crit
              << "); trajectories leave the below-threshold regime\n";
  }
}

}  // namespace

void SdeConfig::validate(const SystemParams& p) const {
  p.validate();
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(dt)) throw InvalidParameters("sde.dt must be positive");
  if (!positive(t_measure)) throw InvalidParameters("sde.t_measure must be positive");
  if (!std::isfinite(t_transient) || t_transient < 0.0) {
    throw InvalidParameters("sde.t_transient must be non-negative");
  }
  if (n_traj < 1) throw InvalidParameters("sde.n_traj must be at least 1");
  if (noise_substeps < 1) throw InvalidParameters("sde.noise_substeps must be at least 1");
  if (midpoint_iterations < 1) throw InvalidParameters("sde.midpoint_iterations must be at least 1");
  if (batches < 1) throw InvalidParameters("sde.batches must be at least 1");
  if (!positive(divergence_factor)) throw InvalidParameters("sde.divergence_factor must be positive");
  if (sample_interval < 0.0 || !std::isfinite(sample_interval)) {
    throw InvalidParameters("sde.sample_interval must be non-negative");
  }
  if (sample_interval > 0.0) {
    const double r = sample_interval / dt;
    if (r < 1.0 - 1e-9 || std::abs(r - std::round(r)) > 1e-9 * r) {
      throw InvalidParameters("sde.sample_interval must be a positive multiple of sde.dt");
    }
  }
  if (measure_samples() == 0) throw InvalidParameters("sde.t_measure is shorter than one sample");

  const LinearModel m = build_linear_model(p, trivial_fixed_point(p));
  double max_abs = 0.0;
  for (const Complex& e : numeric_eigenvalues(m)) max_abs = std::max(max_abs, std::abs(e));
  if (dt * max_abs >= kMaxStepEigenProduct) {
    std::ostringstream msg;
    msg << "sde.dt = " << dt << " is too coarse: dt * max|eig| = " << dt * max_abs
        << " must stay below " << kMaxStepEigenProduct;
    throw InvalidParameters(msg.str());
  }
}

std::size_t SdeConfig::steps_per_sample() const {
  if (sample_interval <= 0.0) return 1;
  return std::max<std::size_t>(1, count_steps(sample_interval, dt));
}

std::size_t SdeConfig::transient_steps() const { return count_steps(t_transient, dt); }

std::size_t SdeConfig::measure_samples() const {
  return count_steps(t_measure, dt * static_cast<double>(steps_per_sample()));
}

void sde_step(const SystemParams& p, Stepper stepper, int midpoint_iterations, double dt,
              const std::array<double, 4>& dW, PhaseState& x) noexcept {
  if (stepper == Stepper::EulerMaruyama) {
    const PhaseState f = deterministic_drift(p, x);
    PhaseState next = x;
    for (std::size_t k = 0; k < 8; ++k) next[k] += f[k] * dt;
    add_noise(x, p.kappa, dW, 1.0, next);
    x = next;
    return;
  }
  // The noise amplitudes depend only on the pump variables, which carry no
  // noise themselves, so the midpoint (Stratonovich) and Ito forms coincide.
  PhaseState mid = x;
  for (int it = 0; it < midpoint_iterations; ++it) {
    const PhaseState f = deterministic_drift(p, mid);
    PhaseState next = x;
    for (std::size_t k = 0; k < 8; ++k) next[k] += 0.5 * f[k] * dt;
    add_noise(mid, p.kappa, dW, 0.5, next);
    mid = next;
  }
  for (std::size_t k = 0; k < 8; ++k) x[k] = 2.0 * mid[k] - x[k];
}

TrajectoryOutcome simulate_trajectory(const SystemParams& p, const SdeConfig& cfg,
                                      std::size_t traj_index, const SampleObserver& observer) {
  NoiseSource noise(trajectory_seed(cfg.seed, traj_index), cfg.dt, cfg.noise_substeps);
  const double limit = divergence_limit(p, cfg);
  PhaseState x{};
  TrajectoryOutcome out;
  std::size_t steps = 0;

  const auto advance = [&]() {
    sde_step(p, cfg.stepper, cfg.midpoint_iterations, cfg.dt, noise.next(), x);
    ++steps;
    if (out_of_bounds(x, limit)) {
      out.diverged = true;
      out.t_diverged = cfg.dt * static_cast<double>(steps);
      return false;
    }
    return true;
  };

  for (std::size_t s = 0; s < cfg.transient_steps(); ++s) {
    if (!advance()) return out;
  }
  const std::size_t per_sample = cfg.steps_per_sample();
  const double h = cfg.dt * static_cast<double>(per_sample);
  const std::size_t n_samples = cfg.measure_samples();
  for (std::size_t n = 0; n < n_samples; ++n) {
    for (std::size_t s = 0; s < per_sample; ++s) {
      if (!advance()) return out;
    }
    if (observer) observer(n, h * static_cast<double>(n + 1), x);
    ++out.samples;
  }
  return out;
}

Ensemble integrate(const SystemParams& p, const SdeConfig& cfg, std::span<const double> omegas) {
  cfg.validate(p);
  if (cfg.n_traj < 2) throw InsufficientData("ensemble statistics need at least 2 trajectories");
  if (!omegas.empty() && cfg.t_measure < kMinMeasureTime) {
    std::ostringstream msg;
    msg << "spectral estimates need t_measure >= " << kMinMeasureTime << " (got " << cfg.t_measure << ")";
    throw InsufficientData(msg.str());
  }
  warn_if_above_threshold(p);

  const std::size_t n_batches = std::min(cfg.batches, cfg.n_traj);
  std::vector<BatchResult> results(n_batches);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t b = next++; b < n_batches; b = next++) {
      const std::size_t first = b * cfg.n_traj / n_batches;
      const std::size_t last = (b + 1) * cfg.n_traj / n_batches;
      results[b] = run_batch(p, cfg, omegas, first, last);
    }
  };
  unsigned n_threads = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  n_threads = std::clamp<unsigned>(n_threads, 1, static_cast<unsigned>(n_batches));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  Ensemble e;
  e.params = p;
  e.config = cfg;
  e.omegas.assign(omegas.begin(), omegas.end());
  e.measure_time = cfg.dt * static_cast<double>(cfg.steps_per_sample() * cfg.measure_samples());
  e.n_traj = cfg.n_traj;
  for (BatchResult& r : results) {
    e.diverged.insert(e.diverged.end(), r.diverged.begin(), r.diverged.end());
    e.batches.push_back(std::move(r.sums));
  }
  return e;
}

SpectrumEstimate estimate_output_spectrum(const Ensemble& e, const QuadratureCombination& c) {
  const Vector4 coeff = c.alpha_coefficients();
  const double baseline = c.vacuum_baseline();
  const double gamma_a = e.params.gamma_a;
  SpectrumEstimate out;
  std::vector<std::size_t> counts;
  for (const EnsembleBatch& b : e.batches) counts.push_back(b.count);

  for (std::size_t m = 0; m < e.omegas.size(); ++m) {
    std::vector<double> values;
    for (const EnsembleBatch& b : e.batches) {
      if (b.count == 0) {
        values.push_back(0.0);
        continue;
      }
      const Eigen::Matrix4cd S = b.cross[m] / static_cast<double>(b.count);
      // Symmetric in (c, c) already; keep the real part of the +/- w average.
      const Complex v = (coeff.transpose() * S * coeff)(0, 0);
      values.push_back(baseline + 2.0 * gamma_a * v.real());
    }
    const auto [mean, se] = batch_statistics(values, counts);
    out.omega.push_back(e.omegas[m]);
    out.value.push_back(mean);
    // Identical batch values (e.g. the vacuum) give an exact zero error.
    out.std_error.push_back(se);
  }
  return out;
}

MomentEstimate ensemble_moment(const Ensemble& e, Moment which) {
  const auto k = static_cast<std::size_t>(which);
  std::vector<double> re, im;
  std::vector<std::size_t> counts;
  for (const EnsembleBatch& b : e.batches) {
    counts.push_back(b.count);
    const Complex v = b.count == 0 ? Complex{} : b.moments[k] / static_cast<double>(b.count);
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  const auto [mre, sre] = batch_statistics(re, counts);
  const auto [mim, sim] = batch_statistics(im, counts);
  return {Complex(mre, mim), sre, sim};
}

RawDumpInfo write_raw_dump(const SystemParams& p, const SdeConfig& cfg, const std::string& prefix) {
  cfg.validate(p);
  warn_if_above_threshold(p);
  RawDumpInfo info;
  info.binary_path = prefix + ".bin";
  info.sidecar_path = prefix + ".json";

  std::ofstream bin(info.binary_path, std::ios::binary | std::ios::trunc);
  if (!bin) throw Error("cannot open " + info.binary_path + " for writing");
  const std::size_t n_samples = cfg.measure_samples();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> diverged;

  for (std::size_t traj = 0; traj < cfg.n_traj; ++traj) {
    const auto observer = [&](std::size_t, double, const PhaseState& x) {
      for (const Complex& z : x) {
        write_le_double(bin, z.real());
        write_le_double(bin, z.imag());
      }
    };
    const TrajectoryOutcome o = simulate_trajectory(p, cfg, traj, observer);
    for (std::size_t n = o.samples; n < n_samples; ++n) {
      for (int k = 0; k < 16; ++k) write_le_double(bin, nan);
    }
    if (o.diverged) diverged.push_back(traj);
    info.records += n_samples;
  }
  bin.close();
  if (!bin) throw Error("failed writing " + info.binary_path);
  info.diverged = diverged.size();

  nlohmann::json side;
  side["format"] = "coupled-opo-raw";
  side["version"] = 1;
  side["byte_order"] = "little";
  side["value_type"] = "float64";
  side["record"] = {"alpha1", "alpha1+", "alpha2", "alpha2+", "beta1", "beta1+", "beta2", "beta2+"};
  side["record_layout"] = "8 complex values, each (re, im)";
  side["n_traj"] = cfg.n_traj;
  side["samples_per_trajectory"] = n_samples;
  side["sample_interval"] = cfg.dt * static_cast<double>(cfg.steps_per_sample());
  side["first_sample_time"] = cfg.dt * static_cast<double>(cfg.steps_per_sample());
  side["time_origin"] = "end of transient";
  side["diverged"] = diverged;
  side["params"] = params_to_json(p);
  side["sde"] = sde_config_to_json(cfg);
  std::ofstream js(info.sidecar_path, std::ios::trunc);
  if (!js) throw Error("cannot open " + info.sidecar_path + " for writing");
  js << side.dump(2) << '\n';
  return info;
}

std::string to_string(Stepper s) {
  switch (s) {
    case Stepper::EulerMaruyama:
      return "euler-maruyama";
    case Stepper::SemiImplicitMidpoint:
      return "semi-implicit-midpoint";
  }
  return "unknown";
}

Stepper stepper_from_string(const std::string& name) {
  if (name == "euler-maruyama" || name == "em") return Stepper::EulerMaruyama;
  if (name == "semi-implicit-midpoint" || name == "sim") return Stepper::SemiImplicitMidpoint;
  throw InvalidParameters("unknown stepper '" + name + "' (expected euler-maruyama or semi-implicit-midpoint)");
}

}  // namespace copo
