#pragma once

// System parameters, below-threshold steady states and stability thresholds of
// two evanescently coupled intracavity downconverters.
//
// All rates are expressed in units of the low-frequency cavity decay rate
// gamma_a. The doubled phase-space state is ordered
//   [alpha1, alpha1+, alpha2, alpha2+, beta1, beta1+, beta2, beta2+]
// everywhere in the library.

#include <array>
#include <complex>
#include <cstddef>

namespace copo {

using Complex = std::complex<double>;

/// Doubled phase-space variables of the positive-P representation.
using PhaseState = std::array<Complex, 8>;

namespace slot {
inline constexpr std::size_t alpha1 = 0;
inline constexpr std::size_t alpha1_plus = 1;
inline constexpr std::size_t alpha2 = 2;
inline constexpr std::size_t alpha2_plus = 3;
inline constexpr std::size_t beta1 = 4;
inline constexpr std::size_t beta1_plus = 5;
inline constexpr std::size_t beta2 = 6;
inline constexpr std::size_t beta2_plus = 7;
}  // namespace slot

struct SystemParams {
  double kappa = 0.01;    ///< nonlinearity
  double gamma_a = 1.0;   ///< low-frequency cavity decay
  double gamma_b = 1.0;   ///< high-frequency cavity decay
  double J_a = 0.0;       ///< evanescent coupling at the low frequency
  double J_b = 0.0;       ///< evanescent coupling at the high frequency
  double Delta_a = 0.0;   ///< omega_a - omega_L
  double Delta_b = 0.0;   ///< omega_b - 2 omega_L
  Complex eps1{0.0, 0.0};
  Complex eps2{0.0, 0.0};

  /// Throws InvalidParameters unless the decay rates and kappa are positive
  /// and every field is finite.
  void validate() const;

  bool equal_pumps() const noexcept { return eps1 == eps2; }
  bool resonant() const noexcept { return Delta_a == 0.0 && Delta_b == 0.0; }

  /// Copy with both pumps set to `eps`.
  SystemParams with_pump(Complex eps) const noexcept {
    SystemParams p = *this;
    p.eps1 = eps;
    p.eps2 = eps;
    return p;
  }
};

struct DerivedScales {
  double gamma_tilde_a = 0.0;  ///< sqrt(gamma_a^2 + J_a^2)
  double gamma_tilde_b = 0.0;  ///< sqrt(gamma_b^2 + J_b^2)
  double eps_crit = 0.0;       ///< threshold pump amplitude for equal pumps
  double theta_b = 0.0;        ///< phase of the intracavity pump field, radians
  double pump_fraction = 0.0;  ///< max_j |eps_j| / eps_crit
};

enum class Regime { BelowThreshold, AtOrAboveThreshold };

struct SteadyState {
  Complex beta1{};
  Complex beta2{};
  Complex alpha1{};
  Complex alpha2{};
  Regime regime = Regime::BelowThreshold;

  /// Steady state embedded in the doubled phase space (plus variables are
  /// the complex conjugates of the mean fields).
  PhaseState phase_state() const noexcept;
};

/// Threshold classification guard band, relative to eps_crit.
inline constexpr double kThresholdGuard = 1e-9;

DerivedScales derived_scales(const SystemParams& p);

/// Below-threshold steady state (alpha = 0). Throws AboveThreshold when the
/// pump destabilizes the trivial solution.
SteadyState steady_state(const SystemParams& p);

/// Same fixed point as steady_state() but never throws; `regime` records
/// whether the linearization around it is valid.
SteadyState trivial_fixed_point(const SystemParams& p);

/// Noise-free right-hand side of the positive-P equations of motion.
PhaseState deterministic_drift(const SystemParams& p, const PhaseState& x) noexcept;

/// The eight eigenvalues of the fluctuation drift matrix at the trivial fixed
/// point, sorted by (Re, Im). Closed form for resonant cavities with equal
/// pumps; dense eigendecomposition otherwise.
std::array<Complex, 8> stability_eigenvalues(const SystemParams& p);

/// Closed-form eigenvalues (resonant, equal pumps). Throws DomainError
/// outside that regime.
std::array<Complex, 8> analytic_stability_eigenvalues(const SystemParams& p);

/// Smallest real part of the numeric drift-matrix eigenvalues at the trivial
/// fixed point.
double min_real_eigenvalue(const SystemParams& p);

struct BisectionOptions {
  double bracket_factor = 10.0;  ///< upper bracket in units of analytic eps_crit
  double rel_tol = 1e-12;
  int max_iter = 200;
};

/// Equal real pump amplitude at which min Re(eig(A)) crosses zero, found by
/// bisection. The pump fields of `p` are ignored. Throws NoCrossing when the
/// bracket shows no sign change.
double threshold_bisection(const SystemParams& p, const BisectionOptions& opts = {});

}  // namespace copo
