#pragma once

// Quantum-correlation criteria evaluated on output spectra: single-mode
// squeezing, the Duan inseparability sum and the Reid EPR product.
//
// Normalization: coherent states give 1 per single-mode quadrature variance,
// so the separability bound on the Duan sum is 4 (not 2 as in conventions
// with vacuum variance 1/2). The EPR bound on the inferred-variance product
// is 1.

#include <cstddef>

#include "copo/model.hpp"
#include "copo/spectrum.hpp"

namespace copo {

inline constexpr double kDuanBound = 4.0;
inline constexpr double kEprBound = 1.0;
inline constexpr double kMinConditioningVariance = 1e-14;

/// Which combined quadratures enter the Duan sum: X at theta and Y at
/// theta + pi/2.
enum class DuanPairing {
  XMinusYPlus,  ///< S(X1 - X2) + S(Y1 + Y2)
  XPlusYMinus,  ///< S(X1 + X2) + S(Y1 - Y2)
};

enum class Objective { Squeezing, Duan, Epr };

/// Output second moments of both low-frequency modes with X quadratures at
/// theta and Y quadratures at theta + pi/2.
struct TwoModeMoments {
  double theta = 0.0;
  double S_X1 = 1.0, S_Y1 = 1.0;
  double S_X2 = 1.0, S_Y2 = 1.0;
  double V_X1Y1 = 0.0;
  double V_X2Y2 = 0.0;
  double V_X1X2 = 0.0;
  double V_Y1Y2 = 0.0;
};

TwoModeMoments two_mode_moments(const SpectralMatrix& s, double theta, double gamma_a);

/// Extremal quadrature angles of a single-mode moment matrix, folded into
/// [0, pi) and differing by pi/2. With V_XY = 0 the pair is {0, pi/2}.
struct AnglePair {
  double squeezed = 0.0;
  double antisqueezed = 0.0;
};

AnglePair theta_optimal(double V_X, double V_Y, double V_XY);

double duan_sum(const TwoModeMoments& m, DuanPairing pairing);
double duan_sum(const SystemParams& p, double omega, double theta, DuanPairing pairing);

/// Product S_inf(X_j) S_inf(Y_j) of the inferred variances of mode
/// j = infer_from, conditioned on measurements of the other mode.
/// Throws DegenerateVariance if a conditioning variance is below 1e-14.
double epr_product(const TwoModeMoments& m, int infer_from = 1);
double epr_product(const SystemParams& p, double omega, double theta, int infer_from = 1);

struct CriteriaFlags {
  bool squeezed = false;
  bool entangled = false;
  bool epr = false;
};

struct CorrelationRecord {
  double omega = 0.0;
  double theta = 0.0;  ///< radians, folded into [0, pi)
  double S_X = 1.0;    ///< mode 1 at theta
  double S_Y = 1.0;    ///< mode 1 at theta + pi/2
  double cov_XY = 0.0;
  double duan_sum = kDuanBound;
  double epr_product = kEprBound;
  CriteriaFlags flags;
};

struct CriteriaOptions {
  DuanPairing pairing = DuanPairing::XMinusYPlus;
  int infer_from = 1;
};

CorrelationRecord correlation_record(const SpectralMatrix& s, double theta, double gamma_a,
                                     const CriteriaOptions& opts = {});

/// Value of `objective` for the given moments: S_X1 (squeezing), the Duan
/// sum, or the EPR product.
double objective_value(const TwoModeMoments& m, Objective objective,
                       const CriteriaOptions& opts = {});

struct AngleOptimum {
  double theta = 0.0;  ///< folded into [0, pi)
  double value = 0.0;
};

struct OptimizeOptions {
  CriteriaOptions criteria;
  int grid_points = 181;
  double grid_origin = 0.0;  ///< the scan covers [origin, origin + pi]
  double tolerance = 1e-6;   ///< golden-section bracket width, radians
};

/// Minimize `objective` over theta by a grid scan followed by golden-section
/// refinement. Deterministic: ties on the grid go to the first point.
AngleOptimum optimize_angle(const SpectralMatrix& s, double gamma_a, Objective objective,
                            const OptimizeOptions& opts = {});
AngleOptimum optimize_angle(const SystemParams& p, double omega, Objective objective,
                            const OptimizeOptions& opts = {});

struct FrequencyOptimum {
  double omega = 0.0;
  double theta = 0.0;
  double value = 0.0;
};

/// Frequency in [0, omega_max] where the angle-optimized objective is
/// smallest. Values within a relative 1e-9 of the minimum count as ties and
/// the lowest frequency wins.
FrequencyOptimum best_frequency(const SystemParams& p, Objective objective, double omega_max,
                                std::size_t points = 801, const OptimizeOptions& opts = {});

}  // namespace copo
