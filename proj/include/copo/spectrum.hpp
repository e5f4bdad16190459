#pragma once

// Intracavity spectral matrices S(omega) = (A + i w)^-1 B B^T (A^T - i w)^-1
// and their projection onto measured output quadratures.
//
// Output normalization: a coherent state has variance 1 per single-mode
// quadrature, and an intracavity normally-ordered spectrum V maps to the
// output as baseline + 2 gamma_a V.

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "copo/linearized.hpp"
#include "copo/model.hpp"

namespace copo {

struct SpectralMatrix {
  double omega = 0.0;
  Matrix8 S;
};

struct CombinedSpectralMatrix {
  double omega = 0.0;
  Matrix4 S;
};

/// Reciprocal condition number below which (A + i w) is treated as singular.
inline constexpr double kMinReciprocalCondition = 1e-12;

/// Throws SingularAtFrequency when A +/- i w is numerically singular.
SpectralMatrix spectral_matrix(const LinearModel& m, double omega);
CombinedSpectralMatrix spectral_matrix(const CombinedModel& m, double omega);

/// Single-mode quadrature X^theta = a e^{-i theta} + a^dag e^{i theta}.
struct QuadratureSelector {
  int mode = 1;  ///< 1 or 2
  double theta = 0.0;

  /// theta folded into [0, pi); X^theta and X^{theta+pi} have equal variance.
  double reported_theta() const;
};

/// Coefficient vector c over the 8 fluctuation slots with X = c^T dx.
Vector8 quadrature_coefficients(const QuadratureSelector& q);

/// Real linear combination sum_k w_k X_{mode_k}^{theta_k}, e.g. X1 - X2.
class QuadratureCombination {
 public:
  struct Term {
    QuadratureSelector quadrature;
    double weight = 1.0;
  };

  QuadratureCombination() = default;
  QuadratureCombination(std::initializer_list<Term> terms) : terms_(terms) {}

  static QuadratureCombination single(int mode, double theta);
  /// X1^theta + sign * X2^theta
  static QuadratureCombination pair(double theta, double sign);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  QuadratureCombination& add(QuadratureSelector q, double weight);

  Vector8 coefficients() const;
  /// Coefficients restricted to the low-frequency slots
  /// [alpha1, alpha1+, alpha2, alpha2+].
  Vector4 alpha_coefficients() const;
  /// Output value of this combination for a coherent state.
  double vacuum_baseline() const;

 private:
  std::vector<Term> terms_;
};

/// Coherent-state output covariance of two single-mode quadratures:
/// cos(theta1 - theta2) for the same mode, zero across modes.
double vacuum_covariance(const QuadratureSelector& q1, const QuadratureSelector& q2);

/// Output covariance of two quadratures (variance when q1 == q2). The
/// projection is symmetrized over +/- omega and must be real.
double quadrature_variance_out(const SpectralMatrix& s, const QuadratureSelector& q1,
                               const QuadratureSelector& q2, double gamma_a);

/// Output variance of a combination of quadratures.
double output_spectrum(const SpectralMatrix& s, const QuadratureCombination& c,
                       double gamma_a);

/// Symmetrized real projection 0.5 (c1^T S c2 + c2^T S c1). Throws
/// NumericalError if the imaginary residue is not negligible.
double symmetric_projection(const Matrix8& S, const Vector8& c1, const Vector8& c2);

// ---------------------------------------------------------------------------
// Closed forms

struct SingleOpoVariances {
  double S_X = 1.0;
  double S_Y = 1.0;
};

/// Output X and Y variances of one uncoupled resonant OPO.
SingleOpoVariances single_opo_variances(double gamma_a, double gamma_b, double kappa,
                                        double eps, double omega);

struct AnalyticVariances {
  double S_X = 1.0;     ///< S_X1 = S_X2
  double S_Y = 1.0;     ///< S_Y1 = S_Y2
  double V_XY = 0.0;    ///< V(X_j, Y_j)
  double V_X1X2 = 0.0;
  double V_Y1Y2 = 0.0;  ///< always -V_X1X2
};

/// Resonant coupled device with equal real pumps. Throws DomainError for
/// nonzero detunings or unequal/complex pumps.
AnalyticVariances analytic_variances(const SystemParams& p, double omega);

struct CombinedVariances {
  double S_Xp = 2.0;
  double S_Yp = 2.0;
  double S_Xm = 2.0;
  double S_Ym = 2.0;
};

/// Sum/difference quadrature variances for Delta_a = J_a, Delta_b = J_b.
/// Throws DetuningMismatch outside that regime.
CombinedVariances analytic_combined(const SystemParams& p, double omega);

/// The same four variances evaluated numerically from the combined model.
CombinedVariances combined_variances(const CombinedModel& m, double omega, double gamma_a);

/// The same four variances projected from the full 8x8 model (any params).
CombinedVariances combined_variances(const SpectralMatrix& s, double gamma_a);

/// n evenly spaced points on [lo, hi] (n >= 2), or {lo} when n == 1.
std::vector<double> frequency_grid(double lo, double hi, std::size_t n);

/// Fold an angle into [0, pi).
double fold_angle(double theta);

}  // namespace copo
