#include <doctest.h>

#include <cmath>
#include <random>

#include "copo/errors.hpp"
#include "copo/linearized.hpp"
#include "copo/model.hpp"
#include "support.hpp"

using namespace copo;

TEST_CASE("threshold pump for simple configurations") {
  SystemParams p;
  CHECK(derived_scales(p).eps_crit == doctest::Approx(100.0).epsilon(1e-14));

  p.J_a = p.J_b = 1.0;
  CHECK(derived_scales(p).eps_crit == doctest::Approx(200.0).epsilon(1e-14));

  p = test::detuned_preset();
  CHECK(derived_scales(p).eps_crit == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(derived_scales(p).pump_fraction == doctest::Approx(0.5));
}

TEST_CASE("pump phase follows the high-frequency coupling") {
  SystemParams p;
  p.J_b = 1.0;
  CHECK(derived_scales(p).theta_b == doctest::Approx(std::atan(1.0)));
  p.Delta_b = 1.0;
  CHECK(derived_scales(p).theta_b == doctest::Approx(0.0));
}

TEST_CASE("steady state with equal pumps") {
  SystemParams p;
  p.J_b = 1.0;
  p = p.with_pump(50.0);
  const SteadyState ss = steady_state(p);
  const Complex expected = 50.0 / Complex(1.0, -1.0);
  CHECK(std::abs(ss.beta1 - expected) < 1e-13);
  CHECK(std::abs(ss.beta2 - expected) < 1e-13);
  CHECK(ss.alpha1 == Complex{});
  CHECK(ss.alpha2 == Complex{});
  CHECK(ss.regime == Regime::BelowThreshold);
}

TEST_CASE("steady states are fixed points of the drift") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 100; ++n) {
    const SystemParams p = n % 2 == 0 ? test::random_resonant(rng) : test::random_detuned(rng);
    const SteadyState ss = steady_state(p);
    const PhaseState f = deterministic_drift(p, ss.phase_state());
    double worst = 0.0;
    for (const Complex& z : f) worst = std::max(worst, std::abs(z));
    CHECK(worst < 1e-12 * std::max(1.0, std::abs(p.eps1) + std::abs(p.eps2)));
  }
}

TEST_CASE("above threshold is rejected and reports eps_c") {
  SystemParams p;
  p.J_a = p.J_b = 1.0;
  p = p.with_pump(250.0);
  try {
    (void)steady_state(p);
    FAIL("expected AboveThreshold");
  } catch (const AboveThreshold& e) {
    CHECK(e.eps_crit() == doctest::Approx(200.0));
    CHECK(std::string(e.what()).find("200") != std::string::npos);
  }
  CHECK(trivial_fixed_point(p).regime == Regime::AtOrAboveThreshold);
}

TEST_CASE("guard band treats pumps within 1e-9 of threshold as above") {
  SystemParams p;
  CHECK_THROWS_AS((void)steady_state(p.with_pump(100.0 * (1.0 - 1e-12))), AboveThreshold);
  CHECK_NOTHROW((void)steady_state(p.with_pump(100.0 * (1.0 - 1e-6))));
}

TEST_CASE("unequal pumps are classified by the eigenvalues") {
  SystemParams p;
  p.J_a = 1.0;
  p.J_b = 0.5;
  p.eps1 = 150.0;
  p.eps2 = 10.0;
  const SteadyState ss = trivial_fixed_point(p);
  const double lo = min_real_eigenvalue(p);
  CHECK((ss.regime == Regime::BelowThreshold) == (lo > 0.0));
}

TEST_CASE("parameter validation") {
  SystemParams p;
  p.gamma_a = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameters);
  p = SystemParams{};
  p.kappa = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameters);
  p = SystemParams{};
  p.J_a = std::nan("");
  CHECK_THROWS_AS(p.validate(), InvalidParameters);
  p = SystemParams{};
  p.eps1 = Complex(std::numeric_limits<double>::infinity(), 0.0);
  CHECK_THROWS_AS((void)steady_state(p), InvalidParameters);
}

TEST_CASE("closed-form eigenvalues agree with the dense eigensolver") {
  std::mt19937_64 rng(7);
  for (int n = 0; n < 50; ++n) {
    const SystemParams p = test::random_resonant(rng);
    const auto analytic = analytic_stability_eigenvalues(p);
    const auto numeric = numeric_eigenvalues(build_linear_model(p, steady_state(p)));
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(analytic[k] - numeric[k]) < 1e-10);
  }
}

TEST_CASE("closed-form eigenvalues at the reference point") {
  SystemParams p;
  p.J_a = p.J_b = 1.0;
  p = p.with_pump(100.0);  // half threshold
  const auto e = analytic_stability_eigenvalues(p);
  // gamma_b +/- i J_b twice and gamma_a +/- i sqrt(J_a^2 - 1/2) twice.
  const double im = std::sqrt(0.5);
  int near_unit = 0, near_root = 0;
  for (const Complex& z : e) {
    if (std::abs(std::abs(z.imag()) - 1.0) < 1e-12) ++near_unit;
    if (std::abs(std::abs(z.imag()) - im) < 1e-12) ++near_root;
    CHECK(z.real() == doctest::Approx(1.0));
  }
  CHECK(near_unit == 4);
  CHECK(near_root == 4);
}

TEST_CASE("closed-form eigenvalues are limited to resonant equal pumps") {
  CHECK_THROWS_AS((void)analytic_stability_eigenvalues(test::detuned_preset()), DomainError);
  SystemParams p;
  p.eps1 = 10.0;
  p.eps2 = 20.0;
  CHECK_THROWS_AS((void)analytic_stability_eigenvalues(p), DomainError);
}

TEST_CASE("bisection recovers the analytic threshold") {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 20; ++n) {
    SystemParams p = test::random_resonant(rng);
    if (n % 2 == 1) {
      p.Delta_a = p.J_a;
      p.Delta_b = p.J_b;
    }
    const double analytic = derived_scales(p).eps_crit;
    CHECK(test::close_rel(threshold_bisection(p), analytic, 1e-6));
  }
}

TEST_CASE("threshold with coupling and detuning of opposite sign") {
  SystemParams p;
  p.J_a = 2.0;
  p.Delta_a = -1.0;
  p.J_b = 0.5;
  p.Delta_b = 0.3;
  CHECK(test::close_rel(threshold_bisection(p), derived_scales(p).eps_crit, 1e-6));
}

TEST_CASE("bisection without a sign change throws") {
  SystemParams p;
  BisectionOptions opts;
  opts.bracket_factor = 0.5;
  CHECK_THROWS_AS((void)threshold_bisection(p, opts), NoCrossing);
}
