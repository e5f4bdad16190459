#include <doctest.h>

#include <numbers>
#include <random>

#include "copo/errors.hpp"
#include "copo/linearized.hpp"
#include "copo/spectrum.hpp"
#include "support.hpp"

using namespace copo;

namespace {

constexpr double kQuarter = std::numbers::pi / 2.0;

SpectralMatrix spectrum_at(const SystemParams& p, double omega) {
  return spectral_matrix(build_linear_model(p, steady_state(p)), omega);
}

}  // namespace

TEST_CASE("single downconverter matches the scalar oracle") {
  std::mt19937_64 rng(21);
  for (int n = 0; n < 20; ++n) {
    SystemParams p;
    p.gamma_a = test::uniform(rng, 0.5, 2.0);
    p.gamma_b = test::uniform(rng, 0.5, 2.0);
    p.kappa = test::uniform(rng, 0.005, 0.05);
    p = p.with_pump(test::uniform(rng, 0.05, 0.95) * derived_scales(p).eps_crit);
    const double ke = p.kappa * p.eps1.real();
    for (double w : {0.0, 0.3, 1.0, 4.0, 15.0}) {
      const SpectralMatrix s = spectrum_at(p, w);
      const test::ScalarOpo o = test::scalar_opo(p.gamma_a, p.gamma_b, ke, w);
      const double sx = output_spectrum(s, QuadratureCombination::single(1, 0.0), p.gamma_a);
      const double sy = output_spectrum(s, QuadratureCombination::single(1, kQuarter), p.gamma_a);
      CHECK(test::close_rel(sx, o.S_X, 1e-12));
      CHECK(test::close_rel(sy, o.S_Y, 1e-12));
      const SingleOpoVariances lib = single_opo_variances(p.gamma_a, p.gamma_b, p.kappa, p.eps1.real(), w);
      CHECK(test::close_rel(lib.S_X, o.S_X, 1e-12));
      CHECK(test::close_rel(lib.S_Y, o.S_Y, 1e-12));
    }
  }
}

TEST_CASE("single downconverter at half threshold saturates the uncertainty product") {
  SystemParams p;
  p = p.with_pump(50.0);  // kappa eps = 0.5
  const SpectralMatrix s = spectrum_at(p, 0.0);
  const double sx = output_spectrum(s, QuadratureCombination::single(1, 0.0), 1.0);
  const double sy = output_spectrum(s, QuadratureCombination::single(1, kQuarter), 1.0);
  CHECK(std::abs(sx - 9.0) < 1e-12);
  CHECK(std::abs(sy - 1.0 / 9.0) < 1e-12);
  CHECK(std::abs(sx * sy - 1.0) < 1e-12);
}

TEST_CASE("spectra return to the coherent level at high frequency") {
  std::mt19937_64 rng(22);
  for (int n = 0; n < 10; ++n) {
    const SystemParams p = test::random_detuned(rng);
    const SpectralMatrix s = spectrum_at(p, 1e4);
    for (double th : {0.0, 0.7, kQuarter}) {
      CHECK(std::abs(output_spectrum(s, QuadratureCombination::single(1, th), p.gamma_a) - 1.0) < 1e-5);
      CHECK(std::abs(output_spectrum(s, QuadratureCombination::pair(th, -1.0), p.gamma_a) - 2.0) < 1e-5);
    }
  }
}

TEST_CASE("output spectra are even in frequency") {
  std::mt19937_64 rng(23);
  for (int n = 0; n < 20; ++n) {
    const SystemParams p = test::random_detuned(rng);
    const double w = test::uniform(rng, 0.1, 20.0);
    const double th = test::uniform(rng, 0.0, std::numbers::pi);
    const SpectralMatrix plus = spectrum_at(p, w);
    const SpectralMatrix minus = spectrum_at(p, -w);
    for (const auto& c : {QuadratureCombination::single(1, th), QuadratureCombination::single(2, th),
                          QuadratureCombination::pair(th, 1.0), QuadratureCombination::pair(th, -1.0)}) {
      CHECK(test::close_rel(output_spectrum(plus, c, p.gamma_a), output_spectrum(minus, c, p.gamma_a), 1e-12));
    }
    // S(-w) = S(w)^T
    CHECK((minus.S - plus.S.transpose()).cwiseAbs().maxCoeff() < 1e-12 * plus.S.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("closed-form resonant variances match the numeric pipeline") {
  std::mt19937_64 rng(24);
  for (int n = 0; n < 20; ++n) {
    const SystemParams p = test::random_resonant(rng);
    for (double w : {0.0, 0.5, 2.0, 7.0}) {
      const SpectralMatrix s = spectrum_at(p, w);
      const AnalyticVariances a = analytic_variances(p, w);
      const QuadratureSelector x1{1, 0.0}, y1{1, kQuarter}, x2{2, 0.0}, y2{2, kQuarter};
      const double scale = std::abs(a.S_X);
      CHECK(std::abs(quadrature_variance_out(s, x1, x1, p.gamma_a) - a.S_X) < 1e-10 * scale);
      CHECK(std::abs(quadrature_variance_out(s, y1, y1, p.gamma_a) - a.S_Y) < 1e-10 * scale);
      CHECK(std::abs(quadrature_variance_out(s, x1, y1, p.gamma_a) - a.V_XY) < 1e-10 * scale);
      CHECK(std::abs(quadrature_variance_out(s, x1, x2, p.gamma_a) - a.V_X1X2) < 1e-10 * scale);
      CHECK(std::abs(quadrature_variance_out(s, y1, y2, p.gamma_a) - a.V_Y1Y2) < 1e-10 * scale);
    }
  }
}

TEST_CASE("resonant reference point") {
  SystemParams p;
  p.J_a = p.J_b = 1.0;
  p = p.with_pump(100.0);
  const AnalyticVariances a = analytic_variances(p, 0.0);
  CHECK(a.S_X == doctest::Approx(29.0 / 9.0).epsilon(1e-12));
  CHECK(a.S_Y == doctest::Approx(7.0 / 3.0).epsilon(1e-12));
  CHECK(a.V_XY == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(a.V_X1X2 == doctest::Approx(-16.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("closed forms refuse parameters outside their domain") {
  CHECK_THROWS_AS((void)analytic_variances(test::detuned_preset(), 0.0), DomainError);
  SystemParams p;
  p.J_a = 1.0;
  p = p.with_pump(Complex(0.0, 30.0));
  CHECK_THROWS_AS((void)analytic_variances(p, 0.0), DomainError);
  CHECK_THROWS_AS((void)analytic_combined(p, 0.0), DetuningMismatch);
  SystemParams above;
  CHECK_THROWS_AS((void)analytic_variances(above.with_pump(120.0), 0.0), AboveThreshold);
}

TEST_CASE("combined-mode spectra three ways") {
  std::mt19937_64 rng(25);
  for (int n = 0; n < 10; ++n) {
    SystemParams p = test::random_resonant(rng);
    p.Delta_a = p.J_a;
    p.Delta_b = p.J_b;
    p = p.with_pump(test::uniform(rng, 0.05, 0.9) * derived_scales(p).eps_crit);
    const SteadyState ss = steady_state(p);
    for (double w : {0.0, 1.0, 2.0 * p.J_a, 13.0}) {
      const CombinedVariances full = combined_variances(spectral_matrix(build_linear_model(p, ss), w), p.gamma_a);
      const CombinedVariances reduced = combined_variances(build_combined_model(p, ss), w, p.gamma_a);
      const CombinedVariances closed = analytic_combined(p, w);
      const test::CombinedOracle o = test::combined_oracle(p, w);
      for (const CombinedVariances* v : {&full, &reduced, &closed}) {
        CHECK(test::close_rel(v->S_Xp, o.S_Xp, 1e-10));
        CHECK(test::close_rel(v->S_Yp, o.S_Yp, 1e-10));
        CHECK(test::close_rel(v->S_Xm, o.S_Xm, 1e-10));
        CHECK(test::close_rel(v->S_Ym, o.S_Ym, 1e-10));
      }
    }
  }
}

TEST_CASE("detuned reference point") {
  const SystemParams p = test::detuned_preset();
  const CombinedVariances v = combined_variances(spectrum_at(p, 0.0), p.gamma_a);
  CHECK(std::abs(v.S_Yp - 2.0 / 9.0) < 1e-12);
  CHECK(std::abs(v.S_Xp - 18.0) < 1e-10);
}

TEST_CASE("vacuum gives coherent baselines") {
  SystemParams p;
  p.J_a = 3.0;
  p.J_b = 1.0;
  const SpectralMatrix s = spectrum_at(p, 0.4);
  CHECK(output_spectrum(s, QuadratureCombination::single(1, 0.3), 1.0) == doctest::Approx(1.0));
  CHECK(output_spectrum(s, QuadratureCombination::pair(0.3, -1.0), 1.0) == doctest::Approx(2.0));
  CHECK(vacuum_covariance({1, 0.0}, {1, kQuarter}) == 0.0);
  CHECK(vacuum_covariance({1, 0.0}, {2, 0.0}) == 0.0);
  CHECK(vacuum_covariance({2, 0.2}, {2, 0.2}) == 1.0);
}

TEST_CASE("spectral matrix at threshold is singular") {
  SystemParams p;
  p = p.with_pump(100.0);
  const LinearModel m = build_linear_model(p, trivial_fixed_point(p));
  CHECK_THROWS_AS((void)spectral_matrix(m, 0.0), SingularAtFrequency);
}

TEST_CASE("quadrature coefficients and angle folding") {
  const Vector8 c = quadrature_coefficients({2, kQuarter});
  CHECK(std::abs(c(2) - Complex(0.0, -1.0)) < 1e-15);
  CHECK(std::abs(c(3) - Complex(0.0, 1.0)) < 1e-15);
  CHECK(c.head<2>().isZero());
  CHECK_THROWS_AS((void)quadrature_coefficients({3, 0.0}), InvalidParameters);
  CHECK(fold_angle(-0.1) == doctest::Approx(std::numbers::pi - 0.1));
  CHECK(fold_angle(std::numbers::pi) == 0.0);
  CHECK(QuadratureSelector{1, 4.0}.reported_theta() == doctest::Approx(4.0 - std::numbers::pi));
}

TEST_CASE("frequency grids include both endpoints and zero") {
  const auto g = frequency_grid(-20.0, 20.0, 1001);
  CHECK(g.front() == -20.0);
  CHECK(g.back() == 20.0);
  CHECK(g[500] == 0.0);
  CHECK_THROWS_AS((void)frequency_grid(0.0, 1.0, 0), InvalidParameters);
}
