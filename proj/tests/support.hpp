#pragma once

// Test-only oracles and random parameter generators. The closed forms here
// are written out independently of the library so they can check it.

#include <cmath>
#include <random>

#include "copo/linearized.hpp"
#include "copo/model.hpp"

namespace copo::test {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Resonant cavities, equal real pumps at `fraction` of threshold.
inline SystemParams random_resonant(std::mt19937_64& rng, double max_fraction = 0.9) {
  SystemParams p;
  p.kappa = uniform(rng, 0.002, 0.05);
  p.gamma_a = uniform(rng, 0.5, 2.0);
  p.gamma_b = uniform(rng, 0.5, 2.0);
  p.J_a = uniform(rng, 0.0, 10.0);
  p.J_b = uniform(rng, 0.0, 5.0);
  const double ec = derived_scales(p).eps_crit;
  return p.with_pump(Complex(uniform(rng, 0.05, max_fraction) * ec, 0.0));
}

/// Arbitrary detunings and complex, unequal pumps, kept below threshold.
inline SystemParams random_detuned(std::mt19937_64& rng) {
  SystemParams p;
  p.kappa = uniform(rng, 0.002, 0.05);
  p.gamma_a = uniform(rng, 0.5, 2.0);
  p.gamma_b = uniform(rng, 0.5, 2.0);
  p.J_a = uniform(rng, -5.0, 10.0);
  p.J_b = uniform(rng, -3.0, 5.0);
  p.Delta_a = uniform(rng, -5.0, 5.0);
  p.Delta_b = uniform(rng, -5.0, 5.0);
  const double ec = derived_scales(p).eps_crit;
  // eps_c refers to equal pumps; unequal complex pumps are redrawn until the
  // trivial solution is stable.
  do {
    p.eps1 = std::polar(uniform(rng, 0.05, 0.6) * ec, uniform(rng, -3.0, 3.0));
    p.eps2 = std::polar(uniform(rng, 0.05, 0.6) * ec, uniform(rng, -3.0, 3.0));
  } while (trivial_fixed_point(p).regime != Regime::BelowThreshold);
  return p;
}

/// Detuned preset: gamma = 1, J_a = Delta_a = 10, J_b = Delta_b = 1, eps = eps_c / 2.
inline SystemParams detuned_preset() {
  SystemParams p;
  p.J_a = p.Delta_a = 10.0;
  p.J_b = p.Delta_b = 1.0;
  return p.with_pump(0.5 * derived_scales(p).eps_crit);
}

/// Output spectra of one downconverter: with ke = kappa*eps (real) the sum and
/// difference of alpha and alpha+ are independent scalar Ornstein-Uhlenbeck
/// processes with damping gamma_a -/+ ke/gamma_b and diffusion 2 ke/gamma_b.
struct ScalarOpo {
  double S_X;
  double S_Y;
};

inline ScalarOpo scalar_opo(double gamma_a, double gamma_b, double ke, double omega) {
  const double g = ke / gamma_b;
  const double sx = 2.0 * g / ((gamma_a - g) * (gamma_a - g) + omega * omega);
  const double sy = 2.0 * g / ((gamma_a + g) * (gamma_a + g) + omega * omega);
  return {1.0 + 2.0 * gamma_a * sx, 1.0 - 2.0 * gamma_a * sy};
}

/// Combined-mode output spectra for Delta = J and equal real pumps.
struct CombinedOracle {
  double S_Xp, S_Yp, S_Xm, S_Ym;
};

inline CombinedOracle combined_oracle(const SystemParams& p, double omega) {
  const double ga = p.gamma_a, gb = p.gamma_b, ke = p.kappa * p.eps1.real();
  const double w2 = omega * omega;
  const double n = 8.0 * ga * gb * ke;
  CombinedOracle o;
  o.S_Xp = 2.0 + n / (std::pow(ga * gb - ke, 2) + gb * gb * w2);
  o.S_Yp = 2.0 - n / (std::pow(ga * gb + ke, 2) + gb * gb * w2);
  const double j2 = 4.0 * p.J_a * p.J_a;
  const double d = std::pow(gb * gb * (ga * ga + j2 - w2) - ke * ke, 2) + 4.0 * ga * ga * std::pow(gb, 4) * w2;
  o.S_Xm = 2.0 + n * (std::pow(ga * gb + ke, 2) - gb * gb * (j2 - w2)) / d;
  o.S_Ym = 2.0 - n * (std::pow(ga * gb - ke, 2) - gb * gb * (j2 - w2)) / d;
  return o;
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace copo::test
