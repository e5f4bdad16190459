#include "copo/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "copo/errors.hpp"
#include "copo/linearized.hpp"

namespace copo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kAngleTieTolerance = 1e-10;
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

SpectralMatrix spectrum_at(const SystemParams& p, double omega) {
  const SteadyState ss = steady_state(p);
  return spectral_matrix(build_linear_model(p, ss), omega);
}

// Golden-section search for a minimum of f on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TwoModeMoments two_mode_moments(const SpectralMatrix& s, double theta, double gamma_a) {
  const QuadratureSelector x1{1, theta};
  const QuadratureSelector y1{1, theta + kHalfPi};
  const QuadratureSelector x2{2, theta};
  const QuadratureSelector y2{2, theta + kHalfPi};
  TwoModeMoments m;
  m.theta = theta;
  m.S_X1 = quadrature_variance_out(s, x1, x1, gamma_a);
  m.S_Y1 = quadrature_variance_out(s, y1, y1, gamma_a);
  m.S_X2 = quadrature_variance_out(s, x2, x2, gamma_a);
  m.S_Y2 = quadrature_variance_out(s, y2, y2, gamma_a);
  m.V_X1Y1 = quadrature_variance_out(s, x1, y1, gamma_a);
  m.V_X2Y2 = quadrature_variance_out(s, x2, y2, gamma_a);
  m.V_X1X2 = quadrature_variance_out(s, x1, x2, gamma_a);
  m.V_Y1Y2 = quadrature_variance_out(s, y1, y2, gamma_a);
  return m;
}

AnglePair theta_optimal(double V_X, double V_Y, double V_XY) {
  const auto variance_at = [&](double t) {
    const double c = std::cos(t);
    const double s = std::sin(t);
    return V_X * c * c + V_Y * s * s + 2.0 * V_XY * s * c;
  };
  if (V_XY == 0.0) {
    return V_Y < V_X ? AnglePair{kHalfPi, 0.0} : AnglePair{0.0, kHalfPi};
  }
  // Eigenvectors of [[V_X, V_XY], [V_XY, V_Y]] for X^theta = X cos + Y sin.
  const double diff = V_Y - V_X;
  const double root = std::sqrt(diff * diff + 4.0 * V_XY * V_XY);
  const double t_plus = fold_angle(std::atan((diff + root) / (2.0 * V_XY)));
  const double t_minus = fold_angle(std::atan((diff - root) / (2.0 * V_XY)));
  if (variance_at(t_minus) <= variance_at(t_plus)) return {t_minus, t_plus};
  return {t_plus, t_minus};
}

double duan_sum(const TwoModeMoments& m, DuanPairing pairing) {
  const double sx = m.S_X1 + m.S_X2;
  const double sy = m.S_Y1 + m.S_Y2;
  switch (pairing) {
    case DuanPairing::XMinusYPlus:
      return (sx - 2.0 * m.V_X1X2) + (sy + 2.0 * m.V_Y1Y2);
    case DuanPairing::XPlusYMinus:
      return (sx + 2.0 * m.V_X1X2) + (sy - 2.0 * m.V_Y1Y2);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double duan_sum(const SystemParams& p, double omega, double theta, DuanPairing pairing) {
  return duan_sum(two_mode_moments(spectrum_at(p, omega), theta, p.gamma_a), pairing);
}

double epr_product(const TwoModeMoments& m, int infer_from) {
  double sx = 0.0, sy = 0.0, cond_x = 0.0, cond_y = 0.0;
  if (infer_from == 1) {
    sx = m.S_X1;
    sy = m.S_Y1;
    cond_x = m.S_X2;
    cond_y = m.S_Y2;
  } else if (infer_from == 2) {
    sx = m.S_X2;
    sy = m.S_Y2;
    cond_x = m.S_X1;
    cond_y = m.S_Y1;
  } else {
    throw InvalidParameters("infer_from must be 1 or 2");
  }
  if (cond_x < kMinConditioningVariance || cond_y < kMinConditioningVariance) {
    throw DegenerateVariance("conditioning variance too small for the inferred-variance estimate");
  }
  const double inf_x = sx - m.V_X1X2 * m.V_X1X2 / cond_x;
  const double inf_y = sy - m.V_Y1Y2 * m.V_Y1Y2 / cond_y;
  return inf_x * inf_y;
}

double epr_product(const SystemParams& p, double omega, double theta, int infer_from) {
  return epr_product(two_mode_moments(spectrum_at(p, omega), theta, p.gamma_a), infer_from);
}

CorrelationRecord correlation_record(const SpectralMatrix& s, double theta, double gamma_a,
                                     const CriteriaOptions& opts) {
  const TwoModeMoments m = two_mode_moments(s, theta, gamma_a);
  CorrelationRecord r;
  r.omega = s.omega;
  r.theta = fold_angle(theta);
  r.S_X = m.S_X1;
  r.S_Y = m.S_Y1;
  r.cov_XY = m.V_X1Y1;
  r.duan_sum = duan_sum(m, opts.pairing);
  r.epr_product = epr_product(m, opts.infer_from);
  r.flags.squeezed = std::min(r.S_X, r.S_Y) < 1.0;
  r.flags.entangled = r.duan_sum < kDuanBound;
  r.flags.epr = r.epr_product < kEprBound;
  return r;
}

double objective_value(const TwoModeMoments& m, Objective objective, const CriteriaOptions& opts) {
  switch (objective) {
    case Objective::Squeezing:
      return m.S_X1;
    case Objective::Duan:
      return duan_sum(m, opts.pairing);
    case Objective::Epr:
      return epr_product(m, opts.infer_from);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

AngleOptimum optimize_angle(const SpectralMatrix& s, double gamma_a, Objective objective,
                            const OptimizeOptions& opts) {
  if (opts.grid_points < 3) throw InvalidParameters("angle grid needs at least 3 points");
  const auto f = [&](double theta) {
    return objective_value(two_mode_moments(s, theta, gamma_a), objective, opts.criteria);
  };
  const double step = kPi / static_cast<double>(opts.grid_points - 1);
  double best_theta = opts.grid_origin;
  double best_value = f(best_theta);
  // Degenerate minima (the EPR product repeats every quarter turn) are
  // resolved towards the smallest folded angle, independent of the origin.
  for (int k = 1; k < opts.grid_points; ++k) {
    const double theta = opts.grid_origin + step * k;
    const double v = f(theta);
    const double tie = kAngleTieTolerance * std::max(1.0, std::abs(best_value));
    const bool better = v < best_value - tie;
    const bool tied = !better && std::abs(v - best_value) <= tie && fold_angle(theta) < fold_angle(best_theta);
    if (better || tied) {
      best_value = v;
      best_theta = theta;
    }
  }
  const double refined = golden_section(f, best_theta - step, best_theta + step, opts.tolerance);
  const double refined_value = f(refined);
  if (refined_value <= best_value) return {fold_angle(refined), refined_value};
  return {fold_angle(best_theta), best_value};
}

AngleOptimum optimize_angle(const SystemParams& p, double omega, Objective objective,
                            const OptimizeOptions& opts) {
  return optimize_angle(spectrum_at(p, omega), p.gamma_a, objective, opts);
}

FrequencyOptimum best_frequency(const SystemParams& p, Objective objective, double omega_max,
                                std::size_t points, const OptimizeOptions& opts) {
  if (points < 3) throw InvalidParameters("frequency scan needs at least 3 points");
  const LinearModel model = build_linear_model(p, steady_state(p));
  const auto at = [&](double omega) {
    return optimize_angle(spectral_matrix(model, omega), p.gamma_a, objective, opts);
  };

  const std::vector<double> grid = frequency_grid(0.0, omega_max, points);
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = at(grid[k]).value;

  std::vector<FrequencyOptimum> candidates;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const bool left_ok = k == 0 || values[k] <= values[k - 1];
    const bool right_ok = k + 1 == grid.size() || values[k] <= values[k + 1];
    if (!left_ok || !right_ok) continue;
    const double lo = grid[k == 0 ? 0 : k - 1];
    const double hi = grid[k + 1 == grid.size() ? k : k + 1];
    const double w = golden_section([&](double x) { return at(x).value; }, lo, hi, 1e-7);
    const AngleOptimum a = at(w);
    if (a.value <= values[k]) {
      candidates.push_back({w, a.theta, a.value});
    } else {
      const AngleOptimum g = at(grid[k]);
      candidates.push_back({grid[k], g.theta, g.value});
    }
  }

  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) lowest = std::min(lowest, c.value);
  const double tie = 1e-9 * std::max(std::abs(lowest), 1e-300);
  const FrequencyOptimum* pick = nullptr;
  for (const auto& c : candidates) {
    if (c.value - lowest <= tie && (pick == nullptr || c.omega < pick->omega)) pick = &c;
  }
  return *pick;
}

}  // namespace copo
