#include <doctest.h>

#include <random>

#include "copo/errors.hpp"
#include "copo/linearized.hpp"
#include "support.hpp"

using namespace copo;

namespace {

// Central differences of the drift; each variable is independent, so a real
// step gives the complex derivative of a holomorphic polynomial.
Matrix8 finite_difference_jacobian(const SystemParams& p, const PhaseState& x, double h) {
  Matrix8 J;
  for (std::size_t k = 0; k < 8; ++k) {
    PhaseState up = x, down = x;
    up[k] += h;
    down[k] -= h;
    const PhaseState fu = deterministic_drift(p, up);
    const PhaseState fd = deterministic_drift(p, down);
    for (std::size_t r = 0; r < 8; ++r) {
      J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = (fu[r] - fd[r]) / (2.0 * h);
    }
  }
  return J;
}

// Swap each variable with its plus partner.
Matrix8 conjugation_swap() {
  Matrix8 P = Matrix8::Zero();
  for (int k = 0; k < 8; k += 2) {
    P(k, k + 1) = 1.0;
    P(k + 1, k) = 1.0;
  }
  return P;
}

}  // namespace

TEST_CASE("drift matrix is minus the Jacobian at the steady state") {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 30; ++n) {
    const SystemParams p = test::random_detuned(rng);
    const SteadyState ss = steady_state(p);
    const Matrix8 J = finite_difference_jacobian(p, ss.phase_state(), 1e-6);
    const Matrix8 A = build_linear_model(p, ss).drift;
    CHECK((J + A).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("drift matrix is minus the Jacobian away from the origin") {
  // Nonzero low-frequency amplitudes exercise the alpha-dependent entries.
  std::mt19937_64 rng(6);
  for (int n = 0; n < 10; ++n) {
    const SystemParams p = test::random_detuned(rng);
    SteadyState s;
    s.alpha1 = Complex(test::uniform(rng, -3, 3), test::uniform(rng, -3, 3));
    s.alpha2 = Complex(test::uniform(rng, -3, 3), test::uniform(rng, -3, 3));
    s.beta1 = Complex(test::uniform(rng, -30, 30), test::uniform(rng, -30, 30));
    s.beta2 = Complex(test::uniform(rng, -30, 30), test::uniform(rng, -30, 30));
    const Matrix8 J = finite_difference_jacobian(p, s.phase_state(), 1e-6);
    CHECK((J + build_linear_model(p, s).drift).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("drift matrix commutes with phase-space conjugation") {
  std::mt19937_64 rng(8);
  const Matrix8 P = conjugation_swap();
  for (int n = 0; n < 20; ++n) {
    const SystemParams p = test::random_detuned(rng);
    const Matrix8 A = build_linear_model(p, steady_state(p)).drift;
    CHECK((P * A * P - A.conjugate()).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("diffusion is diagonal in the low-frequency block") {
  SystemParams p;
  p.J_b = 1.0;
  p = p.with_pump(60.0);
  const SteadyState ss = steady_state(p);
  const Matrix8 D = build_linear_model(p, ss).diffusion();
  Matrix8 expected = Matrix8::Zero();
  expected(0, 0) = p.kappa * ss.beta1;
  expected(1, 1) = p.kappa * std::conj(ss.beta1);
  expected(2, 2) = p.kappa * ss.beta2;
  expected(3, 3) = p.kappa * std::conj(ss.beta2);
  CHECK((D - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("combined-mode model is a change of basis of the low-frequency block") {
  const SystemParams p = test::detuned_preset();
  const SteadyState ss = steady_state(p);
  const LinearModel full = build_linear_model(p, ss);
  const CombinedModel comb = build_combined_model(p, ss);
  const Matrix4 T = combined_basis();
  const Matrix4 Aaa = full.drift.topLeftCorner<4, 4>();
  const Matrix4 Baa = full.noise.topLeftCorner<4, 4>();
  CHECK((T * Aaa * T.inverse() - comb.drift).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((T * Baa - comb.noise).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("combined sum-mode eigenvalues at the detuned reference point") {
  const SystemParams p = test::detuned_preset();
  const auto e = numeric_eigenvalues(build_combined_model(p, steady_state(p)));
  // gamma_a -/+ kappa |beta| with kappa |beta| = 1/2.
  CHECK(std::abs(e[0] - Complex(0.5, 0.0)) < 1e-12);
  CHECK(std::abs(e[3] - Complex(1.5, 0.0)) < 1e-12);
  // The difference modes oscillate near 2 J_a.
  CHECK(std::abs(std::abs(e[1].imag()) - std::sqrt(400.0 - 0.25)) < 1e-9);
}

TEST_CASE("combined-mode model needs matching detunings and equal pumps") {
  SystemParams p;
  p.J_a = 1.0;
  p = p.with_pump(10.0);
  CHECK_THROWS_AS((void)build_combined_model(p, steady_state(p)), DetuningMismatch);
  p = test::detuned_preset();
  p.eps2 = p.eps1 * 0.5;
  CHECK_THROWS_AS((void)build_combined_model(p, steady_state(p)), DetuningMismatch);
}

TEST_CASE("eigenvalues are sorted by real then imaginary part") {
  std::array<Complex, 5> v{Complex(2, 1), Complex(1, 3), Complex(1, -3), Complex(0.5, 0), Complex(1 + 1e-12, 0)};
  sort_eigenvalues(v);
  CHECK(v[0] == Complex(0.5, 0));
  CHECK(v[1] == Complex(1, -3));
  CHECK(v[2].imag() == 0.0);
  CHECK(v[3] == Complex(1, 3));
  CHECK(v[4] == Complex(2, 1));
}

TEST_CASE("stationary covariance solves the Lyapunov equation") {
  std::mt19937_64 rng(9);
  for (int n = 0; n < 10; ++n) {
    const SystemParams p = test::random_detuned(rng);
    const LinearModel m = build_linear_model(p, steady_state(p));
    const Matrix8 C = stationary_covariance(m);
    const Matrix8 residual = m.drift * C + C * m.drift.transpose() - m.diffusion();
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-12);
  }
}
