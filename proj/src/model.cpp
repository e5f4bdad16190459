#include "copo/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "copo/errors.hpp"
#include "copo/linearized.hpp"

namespace copo {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double max_pump(const SystemParams& p) { return std::max(std::abs(p.eps1), std::abs(p.eps2)); }

}  // namespace

void SystemParams::validate() const {
  const double rates[] = {kappa, gamma_a, gamma_b, J_a, J_b, Delta_a, Delta_b};
  for (double r : rates) {
    if (!std::isfinite(r)) throw InvalidParameters("system parameters must be finite");
  }
  if (!finite(eps1) || !finite(eps2)) throw InvalidParameters("pump amplitudes must be finite");
  if (!(gamma_a > 0.0)) throw InvalidParameters("gamma_a must be positive");
  if (!(gamma_b > 0.0)) throw InvalidParameters("gamma_b must be positive");
  if (!(kappa > 0.0)) throw InvalidParameters("kappa must be positive");
}

PhaseState SteadyState::phase_state() const noexcept {
  return {alpha1, std::conj(alpha1), alpha2, std::conj(alpha2),
          beta1,  std::conj(beta1),  beta2,  std::conj(beta2)};
}

DerivedScales derived_scales(const SystemParams& p) {
  p.validate();
  DerivedScales d;
  d.gamma_tilde_a = std::hypot(p.gamma_a, p.J_a);
  d.gamma_tilde_b = std::hypot(p.gamma_b, p.J_b);

  // The alpha block splits into sum and difference modes detuned by
  // Delta_a - J_a and Delta_a + J_a; the less detuned one goes unstable first.
  const double da = std::min(std::abs(p.J_a - p.Delta_a), std::abs(p.J_a + p.Delta_a));
  const double db = p.J_b - p.Delta_b;
  d.eps_crit = std::hypot(p.gamma_a, da) * std::hypot(p.gamma_b, db) / p.kappa;
  d.theta_b = std::atan2(db, p.gamma_b);
  d.pump_fraction = max_pump(p) / d.eps_crit;
  return d;
}

SteadyState trivial_fixed_point(const SystemParams& p) {
  p.validate();
  SteadyState ss;
  const Complex i(0.0, 1.0);
  if (p.equal_pumps()) {
    ss.beta1 = p.eps1 / (p.gamma_b - i * (p.J_b - p.Delta_b));
    ss.beta2 = ss.beta1;
  } else {
    // With alpha = 0 the pump equations are linear:
    //   [d, -iJ_b; -iJ_b, d] beta = eps,  d = gamma_b + i Delta_b.
    const Complex d(p.gamma_b, p.Delta_b);
    const Complex det = d * d + p.J_b * p.J_b;
    ss.beta1 = (d * p.eps1 + i * p.J_b * p.eps2) / det;
    ss.beta2 = (d * p.eps2 + i * p.J_b * p.eps1) / det;
  }

  bool below = false;
  if (p.equal_pumps()) {
    const DerivedScales d = derived_scales(p);
    below = std::abs(p.eps1) < d.eps_crit * (1.0 - kThresholdGuard);
  } else {
    const LinearModel m = build_linear_model(p, ss);
    const auto eig = numeric_eigenvalues(m);
    below = eig.front().real() > kThresholdGuard * std::min(p.gamma_a, p.gamma_b);
  }
  ss.regime = below ? Regime::BelowThreshold : Regime::AtOrAboveThreshold;
  return ss;
}

SteadyState steady_state(const SystemParams& p) {
  SteadyState ss = trivial_fixed_point(p);
  if (ss.regime != Regime::BelowThreshold) {
    const double ec = derived_scales(p).eps_crit;
    std::ostringstream msg;
    msg << "pump |eps| = " << max_pump(p) << " is at or above the oscillation threshold eps_c = "
        << ec << "; the below-threshold analysis does not apply";
    throw AboveThreshold(msg.str(), ec);
  }
  return ss;
}

PhaseState deterministic_drift(const SystemParams& p, const PhaseState& x) noexcept {
  using namespace slot;
  const Complex i(0.0, 1.0);
  const Complex da(p.gamma_a, p.Delta_a);  // gamma_a + i Delta_a
  const Complex db(p.gamma_b, p.Delta_b);
  const double k = p.kappa;
  PhaseState f;
  f[alpha1] = -da * x[alpha1] + k * x[alpha1_plus] * x[beta1] + i * p.J_a * x[alpha2];
  f[alpha1_plus] =
      -std::conj(da) * x[alpha1_plus] + k * x[alpha1] * x[beta1_plus] - i * p.J_a * x[alpha2_plus];
  f[alpha2] = -da * x[alpha2] + k * x[alpha2_plus] * x[beta2] + i * p.J_a * x[alpha1];
  f[alpha2_plus] =
      -std::conj(da) * x[alpha2_plus] + k * x[alpha2] * x[beta2_plus] - i * p.J_a * x[alpha1_plus];
  f[beta1] = p.eps1 - db * x[beta1] - 0.5 * k * x[alpha1] * x[alpha1] + i * p.J_b * x[beta2];
  f[beta1_plus] = std::conj(p.eps1) - std::conj(db) * x[beta1_plus] -
                  0.5 * k * x[alpha1_plus] * x[alpha1_plus] - i * p.J_b * x[beta2_plus];
  f[beta2] = p.eps2 - db * x[beta2] - 0.5 * k * x[alpha2] * x[alpha2] + i * p.J_b * x[beta1];
  f[beta2_plus] = std::conj(p.eps2) - std::conj(db) * x[beta2_plus] -
                  0.5 * k * x[alpha2_plus] * x[alpha2_plus] - i * p.J_b * x[beta1_plus];
  return f;
}

std::array<Complex, 8> analytic_stability_eigenvalues(const SystemParams& p) {
  p.validate();
  if (!p.resonant() || !p.equal_pumps()) {
    throw DomainError("closed-form eigenvalues need zero detunings and equal pumps");
  }
  const double gtb = std::hypot(p.gamma_b, p.J_b);
  const double g = p.kappa * std::abs(p.eps1) / gtb;
  // Negative radicand gives a purely imaginary root.
  const Complex root = std::sqrt(Complex(g * g - p.J_a * p.J_a, 0.0));
  const Complex pump_lo(p.gamma_b, p.J_b);
  const Complex pump_hi(p.gamma_b, -p.J_b);
  std::array<Complex, 8> lambda = {pump_lo, pump_lo, pump_hi, pump_hi,
                                   p.gamma_a + root, p.gamma_a + root,
                                   p.gamma_a - root, p.gamma_a - root};
  sort_eigenvalues(lambda);
  return lambda;
}

std::array<Complex, 8> stability_eigenvalues(const SystemParams& p) {
  if (p.resonant() && p.equal_pumps()) return analytic_stability_eigenvalues(p);
  const SteadyState ss = trivial_fixed_point(p);
  return numeric_eigenvalues(build_linear_model(p, ss));
}

double min_real_eigenvalue(const SystemParams& p) {
  const SteadyState ss = trivial_fixed_point(p);
  const auto eig = numeric_eigenvalues(build_linear_model(p, ss));
  double lo = eig.front().real();
  for (const Complex& e : eig) lo = std::min(lo, e.real());
  return lo;
}

double threshold_bisection(const SystemParams& p, const BisectionOptions& opts) {
  const double analytic = derived_scales(p.with_pump(0.0)).eps_crit;
  double lo = 0.0;
  double hi = opts.bracket_factor * analytic;
  const auto margin = [&](double eps) { return min_real_eigenvalue(p.with_pump(eps)); };
  if (!(margin(lo) > 0.0) || margin(hi) > 0.0) {
    throw NoCrossing("min Re(eig(A)) does not change sign on the bisection bracket");
  }
  for (int it = 0; it < opts.max_iter && (hi - lo) > opts.rel_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (margin(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace copo
