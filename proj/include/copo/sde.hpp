#pragma once

// Positive-P stochastic integration of the full nonlinear equations of
// motion. Used as an oracle that is independent of the linearized analysis:
// output spectra are estimated from trajectory periodograms.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "copo/model.hpp"
#include "copo/spectrum.hpp"

namespace copo {

enum class Stepper { EulerMaruyama, SemiImplicitMidpoint };

struct SdeConfig {
  double dt = 0.01;
  double t_transient = 20.0;
  double t_measure = 200.0;
  std::size_t n_traj = 4096;
  std::uint64_t seed = 1;
  Stepper stepper = Stepper::SemiImplicitMidpoint;
  /// Spacing of recorded samples; 0 means every step. Must be a multiple of dt.
  double sample_interval = 0.0;
  /// Each step's Wiener increment is the sum of this many unit normals, so a
  /// run at dt with 2 substeps sees the same Brownian path as a run at dt/2.
  int noise_substeps = 1;
  int midpoint_iterations = 3;
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned threads = 0;
  std::size_t batches = 32;
  /// Divergence when any |variable| exceeds this times max(|beta_ss|, 1).
  double divergence_factor = 1e6;

  /// Throws InvalidParameters on non-positive step or window lengths, a
  /// sample interval that is not a multiple of dt, or dt * max|eig(A)| >= 0.1
  /// at the fixed point of `p`.
  void validate(const SystemParams& p) const;

  std::size_t steps_per_sample() const;
  std::size_t transient_steps() const;
  std::size_t measure_samples() const;
};

/// Minimum measurement window for spectral estimates, in units of 1/gamma_a.
inline constexpr double kMinMeasureTime = 50.0;

struct TrajectoryOutcome {
  bool diverged = false;
  double t_diverged = 0.0;  ///< time since the start of the transient
  std::size_t samples = 0;  ///< samples delivered to the observer
};

/// Called for every recorded sample in the measurement window; `t` is
/// measured from the end of the transient.
using SampleObserver = std::function<void(std::size_t sample, double t, const PhaseState& x)>;

/// Integrate one trajectory from the vacuum. The noise stream depends only on
/// (cfg.seed, traj_index).
TrajectoryOutcome simulate_trajectory(const SystemParams& p, const SdeConfig& cfg,
                                      std::size_t traj_index, const SampleObserver& observer);

/// One stochastic step of the given scheme with Wiener increments dW.
void sde_step(const SystemParams& p, Stepper stepper, int midpoint_iterations, double dt,
              const std::array<double, 4>& dW, PhaseState& x) noexcept;

/// Per-batch sums over accepted trajectories.
struct EnsembleBatch {
  std::size_t count = 0;
  /// cross[m](k, l) = sum over trajectories of a_k(w_m) a_l(-w_m) / T, with
  /// a_k the Fourier transforms of [alpha1, alpha1+, alpha2, alpha2+].
  std::vector<Eigen::Matrix4cd> cross;
  /// Sums of time-averaged moments, indexed by Moment.
  std::array<Complex, 6> moments{};
};

enum class Moment : std::size_t {
  Beta1 = 0,
  Beta2 = 1,
  Alpha1PlusAlpha1 = 2,
  Alpha2PlusAlpha2 = 3,
  Alpha1Squared = 4,
  Alpha2Squared = 5,
};

/// Reduced statistics of a trajectory ensemble.
struct Ensemble {
  SystemParams params;
  SdeConfig config;
  std::vector<double> omegas;
  double measure_time = 0.0;  ///< length of the sampled window
  std::size_t n_traj = 0;
  std::vector<std::size_t> diverged;  ///< indices of excluded trajectories
  std::vector<EnsembleBatch> batches;

  std::size_t accepted() const noexcept { return n_traj - diverged.size(); }
  double divergence_fraction() const noexcept {
    return n_traj == 0 ? 0.0 : static_cast<double>(diverged.size()) / static_cast<double>(n_traj);
  }
};

/// Run cfg.n_traj trajectories (in parallel; results do not depend on the
/// thread count) and accumulate cross spectra at `omegas`. Diverging
/// trajectories are excluded and counted. Throws InsufficientData when
/// spectra are requested with t_measure < 50 or n_traj < 2.
Ensemble integrate(const SystemParams& p, const SdeConfig& cfg, std::span<const double> omegas);

struct SpectrumEstimate {
  std::vector<double> omega;
  std::vector<double> value;
  std::vector<double> std_error;
};

/// Output spectrum of a quadrature combination (coherent baseline included),
/// with standard errors from batch means.
SpectrumEstimate estimate_output_spectrum(const Ensemble& e, const QuadratureCombination& c);

struct MomentEstimate {
  Complex mean;
  double std_error_re = 0.0;
  double std_error_im = 0.0;
};

/// Ensemble mean of a time-averaged moment over the measurement window.
MomentEstimate ensemble_moment(const Ensemble& e, Moment which);

struct RawDumpInfo {
  std::string binary_path;
  std::string sidecar_path;
  std::size_t records = 0;
  std::size_t diverged = 0;
};

/// Write every recorded sample of every trajectory as 8 little-endian
/// complex doubles (re, im interleaved) to `<prefix>.bin`, with a JSON sidecar
/// `<prefix>.json` describing layout, seed and configuration. Samples after a
/// divergence are written as NaN.
RawDumpInfo write_raw_dump(const SystemParams& p, const SdeConfig& cfg, const std::string& prefix);

std::string to_string(Stepper s);
Stepper stepper_from_string(const std::string& name);

}  // namespace copo
