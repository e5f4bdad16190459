#include "copo/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "copo/errors.hpp"

namespace copo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kImagResidueTol = 1e-10;

template <int N>
Eigen::Matrix<Complex, N, N> ou_spectrum(const Eigen::Matrix<Complex, N, N>& A,
                                         const Eigen::Matrix<Complex, N, N>& D, double omega) {
  using Mat = Eigen::Matrix<Complex, N, N>;
  const Mat id = Mat::Identity();
  const Complex iw(0.0, omega);
  const Eigen::PartialPivLU<Mat> plus(A + iw * id);
  const Eigen::PartialPivLU<Mat> minus(A - iw * id);
  const double rc = std::min(plus.rcond(), minus.rcond());
  if (!(rc >= kMinReciprocalCondition)) {
    std::ostringstream msg;
    msg << "A + i omega is singular at omega = " << omega << " (rcond = " << rc
        << "); the pump is at or above threshold";
    throw SingularAtFrequency(msg.str());
  }
  // S = (A + iw)^-1 D (A^T - iw)^-1, and (A^T - iw)^-1 = ((A - iw)^-1)^T.
  const Mat left = plus.solve(D);
  return minus.solve(left.transpose()).transpose();
}

template <int N>
double symmetric_projection_n(const Eigen::Matrix<Complex, N, N>& S,
                              const Eigen::Matrix<Complex, N, 1>& c1,
                              const Eigen::Matrix<Complex, N, 1>& c2) {
  // Averaging c1^T S(w) c2 over +/- w equals symmetrizing in (c1, c2) because
  // S(-w) = S(w)^T for a symmetric diffusion matrix.
  const Complex v = 0.5 * (c1.transpose() * S * c2 + c2.transpose() * S * c1)(0, 0);
  const double scale =
      std::max(1.0, (c1.cwiseAbs().transpose() * S.cwiseAbs() * c2.cwiseAbs())(0, 0));
  if (std::abs(v.imag()) > kImagResidueTol * scale) {
    std::ostringstream msg;
    msg << "quadrature projection has imaginary residue " << v.imag();
    throw NumericalError(msg.str());
  }
  return v.real();
}

void check_mode(int mode) {
  if (mode != 1 && mode != 2) throw InvalidParameters("quadrature mode must be 1 or 2");
}

void require_below_threshold(const SystemParams& p) {
  (void)steady_state(p);
}

bool real_equal_pumps(const SystemParams& p) {
  const double scale = std::max(1.0, std::abs(p.eps1));
  return std::abs(p.eps1 - p.eps2) <= 1e-12 * scale && std::abs(p.eps1.imag()) <= 1e-12 * scale;
}

}  // namespace

SpectralMatrix spectral_matrix(const LinearModel& m, double omega) {
  return {omega, ou_spectrum<8>(m.drift, m.diffusion(), omega)};
}

CombinedSpectralMatrix spectral_matrix(const CombinedModel& m, double omega) {
  return {omega, ou_spectrum<4>(m.drift, m.diffusion(), omega)};
}

double QuadratureSelector::reported_theta() const { return fold_angle(theta); }

Vector8 quadrature_coefficients(const QuadratureSelector& q) {
  check_mode(q.mode);
  Vector8 c = Vector8::Zero();
  const auto k = static_cast<Eigen::Index>(2 * (q.mode - 1));
  c(k) = std::polar(1.0, -q.theta);
  c(k + 1) = std::polar(1.0, q.theta);
  return c;
}

QuadratureCombination QuadratureCombination::single(int mode, double theta) {
  return QuadratureCombination{{QuadratureSelector{mode, theta}, 1.0}};
}

QuadratureCombination QuadratureCombination::pair(double theta, double sign) {
  return QuadratureCombination{{QuadratureSelector{1, theta}, 1.0},
                               {QuadratureSelector{2, theta}, sign}};
}

QuadratureCombination& QuadratureCombination::add(QuadratureSelector q, double weight) {
  check_mode(q.mode);
  terms_.push_back({q, weight});
  return *this;
}

Vector8 QuadratureCombination::coefficients() const {
  Vector8 c = Vector8::Zero();
  for (const Term& t : terms_) c += t.weight * quadrature_coefficients(t.quadrature);
  return c;
}

Vector4 QuadratureCombination::alpha_coefficients() const { return coefficients().head<4>(); }

double QuadratureCombination::vacuum_baseline() const {
  double b = 0.0;
  for (const Term& s : terms_) {
    for (const Term& t : terms_) b += s.weight * t.weight * vacuum_covariance(s.quadrature, t.quadrature);
  }
  return b;
}

double vacuum_covariance(const QuadratureSelector& q1, const QuadratureSelector& q2) {
  check_mode(q1.mode);
  check_mode(q2.mode);
  if (q1.mode != q2.mode) return 0.0;
  // Exact zero for quadratures a quarter turn apart.
  const double c = std::cos(q1.theta - q2.theta);
  return std::abs(c) < 1e-15 ? 0.0 : c;
}

double symmetric_projection(const Matrix8& S, const Vector8& c1, const Vector8& c2) {
  return symmetric_projection_n<8>(S, c1, c2);
}

double quadrature_variance_out(const SpectralMatrix& s, const QuadratureSelector& q1,
                               const QuadratureSelector& q2, double gamma_a) {
  const double v = symmetric_projection(s.S, quadrature_coefficients(q1), quadrature_coefficients(q2));
  return vacuum_covariance(q1, q2) + 2.0 * gamma_a * v;
}

double output_spectrum(const SpectralMatrix& s, const QuadratureCombination& c, double gamma_a) {
  const Vector8 coeff = c.coefficients();
  return c.vacuum_baseline() + 2.0 * gamma_a * symmetric_projection(s.S, coeff, coeff);
}

SingleOpoVariances single_opo_variances(double gamma_a, double gamma_b, double kappa, double eps,
                                        double omega) {
  const double ke = kappa * eps;
  const double gg = gamma_a * gamma_b;
  const double w2 = gamma_b * gamma_b * omega * omega;
  const double num = 4.0 * gg * ke;
  return {1.0 + num / ((gg - ke) * (gg - ke) + w2), 1.0 - num / ((gg + ke) * (gg + ke) + w2)};
}

AnalyticVariances analytic_variances(const SystemParams& p, double omega) {
  p.validate();
  if (!p.resonant()) throw DomainError("closed-form variances need zero detunings");
  if (!real_equal_pumps(p)) throw DomainError("closed-form variances need equal real pumps");
  require_below_threshold(p);

  const double ga = p.gamma_a;
  const double gb = p.gamma_b;
  const double Ja = p.J_a;
  const double Jb = p.J_b;
  const double ke = p.kappa * p.eps1.real();
  const double tb2 = gb * gb + Jb * Jb;
  const double ta2 = ga * ga + Ja * Ja;
  const double w2 = omega * omega;

  const double den = 4.0 * ga * ga * tb2 * tb2 * w2 + std::pow(tb2 * (ta2 - w2) - ke * ke, 2);
  const double common = tb2 * (w2 - Ja * Ja) + Jb * Jb * ga * ga;
  const double cross = 2.0 * ga * Jb * Jb * ke;

  AnalyticVariances v;
  v.S_X = 1.0 + 4.0 * ga * ke * (gb * (common + std::pow(ga * gb + ke, 2)) + cross) / den;
  // The cross term enters the Y variance with a negative sign.
  v.S_Y = 1.0 - 4.0 * ga * ke * (gb * (common + std::pow(ga * gb - ke, 2)) - cross) / den;
  v.V_XY = 4.0 * ga * Jb * ke * (tb2 * (ga * ga - Ja * Ja + w2) + ke * ke) / den;
  v.V_X1X2 = -8.0 * Ja * Jb * ga * ga * tb2 * ke / den;
  v.V_Y1Y2 = -v.V_X1X2;
  return v;
}

CombinedVariances analytic_combined(const SystemParams& p, double omega) {
  p.validate();
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  if (!close(p.Delta_a, p.J_a) || !close(p.Delta_b, p.J_b)) {
    throw DetuningMismatch("combined-mode variances need Delta_a = J_a and Delta_b = J_b");
  }
  if (!real_equal_pumps(p)) throw DetuningMismatch("combined-mode variances need equal real pumps");
  require_below_threshold(p);

  const double ga = p.gamma_a;
  const double gb = p.gamma_b;
  const double ke = p.kappa * p.eps1.real();
  const double gg = ga * gb;
  const double w2 = omega * omega;
  const double num = 8.0 * gg * ke;
  const double four_ja2 = 4.0 * p.J_a * p.J_a;

  CombinedVariances v;
  v.S_Xp = 2.0 + num / ((gg - ke) * (gg - ke) + gb * gb * w2);
  v.S_Yp = 2.0 - num / ((gg + ke) * (gg + ke) + gb * gb * w2);
  const double den = std::pow(gb * gb * (ga * ga + four_ja2 - w2) - ke * ke, 2) +
                     4.0 * ga * ga * std::pow(gb, 4) * w2;
  v.S_Xm = 2.0 + num * ((gg + ke) * (gg + ke) - gb * gb * (four_ja2 - w2)) / den;
  v.S_Ym = 2.0 - num * ((gg - ke) * (gg - ke) - gb * gb * (four_ja2 - w2)) / den;
  return v;
}

CombinedVariances combined_variances(const CombinedModel& m, double omega, double gamma_a) {
  const CombinedSpectralMatrix s = spectral_matrix(m, omega);
  const Complex i(0.0, 1.0);
  const auto out = [&](const Vector4& c) { return 2.0 + 2.0 * gamma_a * symmetric_projection_n<4>(s.S, c, c); };
  Vector4 xp, yp, xm, ym;
  xp << 1.0, 1.0, 0.0, 0.0;
  yp << -i, i, 0.0, 0.0;
  xm << 0.0, 0.0, 1.0, 1.0;
  ym << 0.0, 0.0, -i, i;
  return {out(xp), out(yp), out(xm), out(ym)};
}

CombinedVariances combined_variances(const SpectralMatrix& s, double gamma_a) {
  const double q = kPi / 2.0;
  return {output_spectrum(s, QuadratureCombination::pair(0.0, 1.0), gamma_a),
          output_spectrum(s, QuadratureCombination::pair(q, 1.0), gamma_a),
          output_spectrum(s, QuadratureCombination::pair(0.0, -1.0), gamma_a),
          output_spectrum(s, QuadratureCombination::pair(q, -1.0), gamma_a)};
}

std::vector<double> frequency_grid(double lo, double hi, std::size_t n) {
  if (n == 0) throw InvalidParameters("frequency grid needs at least one point");
  if (n == 1) return {lo};
  std::vector<double> w(n);
  const double span = hi - lo;
  const double last = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) w[k] = lo + span * static_cast<double>(k) / last;
  w.back() = hi;
  return w;
}

double fold_angle(double theta) {
  double r = std::fmod(theta, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r = 0.0;
  return r;
}

}  // namespace copo
